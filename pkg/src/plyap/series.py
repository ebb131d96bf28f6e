"""Time-indexed distance, divergence and overlap series."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, DomainError
from .geometry import log_projective_divergence

__all__ = [
    "DEFAULT_THETA",
    "DistanceSeries",
    "DivergenceSeries",
    "OverlapSeries",
    "ExponentEstimate",
    "series_from_log_overlaps",
]

# Default saturation threshold, radians. Keeps the divergence below ~60 while
# discarding only the plateau tail of bounded systems.
DEFAULT_THETA = 0.05


def _as_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("times must be a non-empty 1D sequence")
    if not np.all(np.diff(t) > 0.0):
        raise DomainError("times must be strictly increasing")
    return t


@dataclass(frozen=True, eq=False)
class DistanceSeries:
    """Ray-space distances d_P(t) to a fixed reference, with saturation flags.

    Entries with d_P > pi - theta are flagged saturated; theta = 0 disables
    flagging (appropriate for closed-form series that never plateau).
    """

    times: np.ndarray
    values: np.ndarray
    saturation_threshold: float = DEFAULT_THETA
    saturated: np.ndarray = field(default=None)

    def __post_init__(self):
        t = _as_times(self.times)
        v = np.asarray(self.values, dtype=float)
        if v.shape != t.shape:
            raise DomainError("values and times must have the same length")
        if np.any(v < -1e-12) or np.any(v > np.pi + 1e-12):
            raise DomainError("distances must lie in [0, pi]")
        theta = float(self.saturation_threshold)
        if not 0.0 <= theta < np.pi / 2:
            raise DomainError("saturation threshold must lie in [0, pi/2)")
        v = np.clip(v, 0.0, np.pi)
        if self.saturated is None:
            sat = (v > np.pi - theta) if theta > 0.0 else np.zeros(t.shape, dtype=bool)
        else:
            sat = np.asarray(self.saturated, dtype=bool)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "saturation_threshold", theta)
        object.__setattr__(self, "saturated", sat)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class DivergenceSeries:
    """ln of the divergence d_P/(pi - d_P) per time; -inf marks coincident rays.

    Saturated flags are copied from the source DistanceSeries; log values are
    finite at unsaturated points except the coincident-ray sentinel.
    """

    times: np.ndarray
    log_values: np.ndarray
    saturated: np.ndarray

    def __post_init__(self):
        t = _as_times(self.times)
        lv = np.asarray(self.log_values, dtype=float)
        sat = np.asarray(self.saturated, dtype=bool)
        if lv.shape != t.shape or sat.shape != t.shape:
            raise DomainError("log_values/saturated must match times in length")
        if np.any(np.isnan(lv)):
            raise DomainError("log divergence values must not be NaN")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "log_values", lv)
        object.__setattr__(self, "saturated", sat)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class OverlapSeries:
    """Externally measured overlaps O(t) with a declared convention.

    convention "amplitude": O = |<a,b>|; "probability": O = |<a,b>|^2.
    """

    times: np.ndarray
    overlaps: np.ndarray
    convention: str = "amplitude"

    def __post_init__(self):
        t = _as_times(self.times)
        ov = np.asarray(self.overlaps, dtype=float)
        if ov.shape != t.shape:
            raise DomainError("overlaps and times must have the same length")
        if self.convention not in ("amplitude", "probability"):
            raise DomainError(f"unknown overlap convention {self.convention!r}")
        bad = np.where(~((ov >= 0.0) & (ov <= 1.0 + 1e-12)))[0]
        if bad.size:
            raise DataFormatError(
                f"overlap {float(ov[bad[0]])} outside [0, 1] at row {int(bad[0])}",
                row=int(bad[0]),
            )
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "overlaps", np.clip(ov, 0.0, 1.0))

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class ExponentEstimate:
    """Finite-time exponent curve plus a windowed asymptotic value.

    finite_time_curve has shape (k, 2): columns (t, lambda_t).  fit_window is
    the (t1, t2) actually used; residual is the RMS of the fit (regression)
    or of the averaged tail (pointwise).
    """

    finite_time_curve: np.ndarray
    asymptotic_value: float
    fit_window: tuple
    method: str
    residual: float
    saturation_time: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.asymptotic_value):
            raise DomainError("asymptotic value must be finite")


def series_from_log_overlaps(times, log_overlaps, theta=DEFAULT_THETA):
    """Build the (DistanceSeries, DivergenceSeries) pair from ln overlaps.

    The distance is 2 arccos(v); the log divergence goes through the
    log-domain path so underflowing overlaps stay usable.
    """
    t = _as_times(times)
    lv = np.minimum(np.asarray(log_overlaps, dtype=float), 0.0)
    if lv.shape != t.shape:
        raise DomainError("log_overlaps and times must have the same length")
    v = np.exp(lv)
    d = 2.0 * np.arccos(np.clip(v, 0.0, 1.0))
    dist = DistanceSeries(t, d, saturation_threshold=theta)
    log_div = np.where(np.isneginf(lv), np.inf, log_projective_divergence(lv))
    div = DivergenceSeries(t, log_div, saturated=dist.saturated)
    return dist, div
