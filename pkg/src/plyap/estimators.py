"""Finite-time and asymptotic sensitivity exponents from divergence series.

The single-path construction compares the divergence of the state at t with
the one at t + dt (one grid step by default), so the exponent at time t is

    lambda_t = ( ln|L(t+dt) - L(t)| - ln|L(dt) - L(0)| ) / t

with L the divergence of the distance to the fixed reference.  All
arithmetic runs on ln L to survive divergences spanning hundreds of orders
of magnitude.  Regression mode fits ln|dL| against t, which drops the O(1/t)
bias the pointwise form inherits from its denominator.
"""

import csv

import numpy as np

from .ensembles import apply_map
from .errors import (
    DataFormatError,
    DegeneratePathError,
    DomainError,
    InsufficientDataError,
    NumericalOverflowError,
    SaturationError,
)
from .geometry import (
    bounded_euclidean_distance,
    classical_divergence,
    log_abs_exp_diff,
    overlap_magnitude,
)
from .series import (
    DEFAULT_THETA,
    DistanceSeries,
    DivergenceSeries,
    ExponentEstimate,
    OverlapSeries,
    series_from_log_overlaps,
)

__all__ = [
    "divergence_series",
    "finite_time_p_lyapunov",
    "asymptotic_estimate",
    "detect_saturation",
    "ingest_overlap_series",
    "read_overlap_csv",
    "trajectory_lyapunov",
]


def divergence_series(times, path, reference, theta=DEFAULT_THETA):
    """Distances and log divergences of a state path against a fixed reference.

    Args:
        times: strictly increasing sample times, one per state.
        path: sequence of ProjectiveState sharing the reference's basis.
        reference: the fixed comparison state.
        theta: saturation threshold in radians, 0 <= theta < pi/2.

    Returns:
        (DistanceSeries, DivergenceSeries).
    """
    states = list(path)
    if not states:
        raise DomainError("path must contain at least one state")
    overlaps = np.array([overlap_magnitude(s, reference) for s in states])
    with np.errstate(divide="ignore"):
        log_overlaps = np.log(overlaps)
    return series_from_log_overlaps(times, log_overlaps, theta=theta)


def _log_increments(div: DivergenceSeries, delta_index: int):
    """ln|dL| over the delta_index stencil, with validity mask.

    A stencil touching a saturated entry is invalid.  Returns the stencil
    times (left points), the log increments and the mask.
    """
    if delta_index < 1:
        raise DomainError("delta_index must be a positive integer")
    n = len(div)
    if n < delta_index + 2:
        raise InsufficientDataError(
            f"series of length {n} too short for delta_index {delta_index}"
        )
    d = delta_index
    lnd = log_abs_exp_diff(div.log_values[d:], div.log_values[:-d])
    valid = ~(div.saturated[d:] | div.saturated[:-d])
    return div.times[:-d], np.asarray(lnd), valid


def finite_time_p_lyapunov(div: DivergenceSeries, delta_index: int = 1) -> np.ndarray:
    """Finite-time exponent curve from a divergence series.

    Returns an array of shape (k, 2) with columns (t, lambda_t).  Points
    whose stencil touches a saturated entry are omitted, as are points where
    the increment vanishes exactly (ln|dL| = -inf, e.g. turning points of a
    periodic path).

    Raises:
        DegeneratePathError: the initial increment vanishes (stationary path).
        InsufficientDataError: fewer than two usable stencil points.
    """
    t, lnd, valid = _log_increments(div, delta_index)
    idx = np.where(valid)[0]
    if idx.size < 2:
        raise InsufficientDataError("fewer than two unsaturated stencil points")
    i0 = idx[0]
    if np.isneginf(lnd[i0]):
        raise DegeneratePathError(
            "initial divergence increment vanishes; path is stationary in ray space"
        )
    later = idx[1:]
    keep = np.isfinite(lnd[later])
    later = later[keep]
    lam = (lnd[later] - lnd[i0]) / (t[later] - t[i0])
    return np.column_stack([t[later], lam])


def _auto_window(t, lnd, valid, rise=2.0):
    """Default fit window: skip the initial transient, keep the growth tail.

    Starts where ln|dL| has risen `rise` nats above its initial value (or
    half the total observed rise when the series saturates earlier than
    that) and ends at the last unsaturated stencil point.
    """
    finite = valid & np.isfinite(lnd)
    idx = np.where(finite)[0]
    if idx.size == 0:
        return None
    base = lnd[idx[0]]
    threshold = min(rise, max(0.0, (float(np.max(lnd[idx])) - base) / 2.0))
    above = idx[lnd[idx] > base + threshold]
    start = above[0] if above.size else idx[0]
    stop = np.where(valid)[0][-1]
    return t[start], t[stop]


def asymptotic_estimate(
    div: DivergenceSeries,
    mode: str = "regression",
    window=None,
    delta_index: int = 1,
    saturation_time=None,
) -> ExponentEstimate:
    """Windowed asymptotic exponent from a divergence series.

    regression mode (default) fits ln|dL| = a + lambda * t by least squares;
    pointwise mode averages the last quartile of the finite-time curve.
    window is (t1, t2); either bound may be None.  With no window the fit
    runs from the point where ln|dL| has risen 2 nats above its initial
    value to the last unsaturated point.  A caller-supplied window must
    contain at least 4 usable points.

    Raises:
        SaturationError: every stencil point is saturated (carries the
            saturation time when known).
        DegeneratePathError / InsufficientDataError: via the curve.
    """
    if mode not in ("regression", "pointwise"):
        raise DomainError(f"unknown estimation mode {mode!r}")
    t, lnd, valid = _log_increments(div, delta_index)
    if not valid.any():
        raise SaturationError(
            "all stencil points are saturated", saturation_time=saturation_time
        )
    curve = finite_time_p_lyapunov(div, delta_index=delta_index)

    if mode == "pointwise":
        k = max(1, curve.shape[0] // 4)
        tail = curve[-k:]
        value = float(np.mean(tail[:, 1]))
        residual = float(np.sqrt(np.mean((tail[:, 1] - value) ** 2)))
        return ExponentEstimate(
            finite_time_curve=curve,
            asymptotic_value=value,
            fit_window=(float(tail[0, 0]), float(tail[-1, 0])),
            method="pointwise",
            residual=residual,
            saturation_time=saturation_time,
        )

    explicit = window is not None and window[0] is not None and window[1] is not None
    if window is None:
        window = _auto_window(t, lnd, valid)
        if window is None:
            raise InsufficientDataError("no finite increments to fit")
    t1 = window[0] if window[0] is not None else _auto_window(t, lnd, valid)[0]
    t2 = window[1] if window[1] is not None else _auto_window(t, lnd, valid)[1]
    sel = valid & np.isfinite(lnd) & (t >= t1) & (t <= t2)
    npts = int(sel.sum())
    if explicit and npts < 4:
        raise InsufficientDataError(
            f"window ({t1}, {t2}) holds {npts} usable points; at least 4 required"
        )
    if not explicit and npts < 4:
        # short series: widen the auto window backward to four usable points
        usable = np.where(valid & np.isfinite(lnd) & (t <= t2))[0]
        take = usable[-4:]
        sel = np.zeros_like(valid)
        sel[take] = True
        npts = take.size
        if npts:
            t1 = float(t[take[0]])
    if npts < 2:
        raise InsufficientDataError("regression needs at least two usable points")
    design = np.column_stack([np.ones(npts), t[sel]])
    coef, *_ = np.linalg.lstsq(design, lnd[sel], rcond=None)
    fitted = design @ coef
    residual = float(np.sqrt(np.mean((lnd[sel] - fitted) ** 2)))
    return ExponentEstimate(
        finite_time_curve=curve,
        asymptotic_value=float(coef[1]),
        fit_window=(float(t1), float(t2)),
        method="regression",
        residual=residual,
        saturation_time=saturation_time,
    )


def detect_saturation(dist: DistanceSeries, plateau_value=None, min_hold: int = 3):
    """First time after which the distance stays within theta of its plateau.

    The plateau level defaults to the median of the trailing quarter of the
    series (at least min_hold points), so a fluctuating quantum plateau is
    located robustly.  Returns None when no plateau is held for at least
    min_hold samples.
    """
    v = dist.values
    n = v.size
    theta = dist.saturation_threshold
    if plateau_value is None:
        k = max(min_hold, n // 4)
        plateau = float(np.median(v[-k:]))
    else:
        plateau = float(plateau_value)
    within = np.abs(v - plateau) <= theta
    if not within[-1]:
        return None
    misses = np.where(~within)[0]
    first = int(misses[-1]) + 1 if misses.size else 0
    if n - first < min_hold:
        return None
    return float(dist.times[first])


def ingest_overlap_series(raw: OverlapSeries, theta=DEFAULT_THETA):
    """Convert an external overlap series into distance/divergence series.

    The distance is 2 arccos(v) with v the amplitude overlap: v = O under the
    amplitude convention, v = sqrt(O) under the probability convention.
    """
    with np.errstate(divide="ignore"):
        log_o = np.log(raw.overlaps)
    log_v = log_o if raw.convention == "amplitude" else 0.5 * log_o
    return series_from_log_overlaps(raw.times, log_v, theta=theta)


def read_overlap_csv(path, convention: str = "amplitude") -> OverlapSeries:
    """Read an overlap series from a CSV file with header ``t,overlap``."""
    times, overlaps = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["t", "overlap"]:
            raise DataFormatError(f"{path}: expected header 't,overlap', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                times.append(float(row[0]))
                overlaps.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise DataFormatError(
                    f"{path}: malformed row at line {lineno}: {row!r}", row=lineno
                ) from exc
    if not times:
        raise DataFormatError(f"{path}: no data rows")
    try:
        return OverlapSeries(np.array(times), np.array(overlaps), convention=convention)
    except DataFormatError as exc:
        # report the offending file line (header + 1-based data rows)
        raise DataFormatError(f"{path}: {exc} (line {exc.row + 2})", row=exc.row + 2) from exc


def trajectory_lyapunov(
    map_descriptor,
    x0,
    epsilon: float = 1e-9,
    steps: int = 400,
    renormalize_every: int = 1,
    method: str = "direct",
) -> float:
    """Two-trajectory exponent of a built-in classical map.

    Tracks a companion point offset by epsilon, renormalizing the separation
    back to epsilon every renormalize_every steps and accumulating the log
    stretch.  method "direct" uses the Euclidean separation; "divergence"
    pushes each separation through the bounded metric and its divergence
    (an algebraic identity makes the two agree to rounding).
    """
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    if method not in ("direct", "divergence"):
        raise DomainError(f"unknown method {method!r}")
    kind = map_descriptor.kind
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    offset = np.zeros_like(x)
    offset[0] = epsilon
    y = x + offset

    def separation(a, b):
        # periodic coordinates compare by minimal image so a wrap event does
        # not masquerade as an O(1) jump (the x coordinate for the baker,
        # everything for the circle maps)
        delta = b - a
        if kind in ("r_adic", "rotation"):
            delta -= np.round(delta)
        elif kind == "baker":
            delta[0] -= np.round(delta[0])
        return delta

    def log_stretch(d):
        if method == "direct":
            return np.log(d / epsilon)
        lam_d = classical_divergence(bounded_euclidean_distance(d))
        lam_e = classical_divergence(bounded_euclidean_distance(epsilon))
        return np.log(lam_d / lam_e)

    total = 0.0
    for k in range(1, steps + 1):
        x = apply_map(map_descriptor, x)
        y = apply_map(map_descriptor, y)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NumericalOverflowError("trajectory left double-precision range")
        if k % renormalize_every == 0 or k == steps:
            delta = separation(x, y)
            d = float(np.linalg.norm(delta))
            if d == 0.0:
                raise DegeneratePathError("trajectories coincide; cannot renormalize")
            total += log_stretch(d)
            delta *= epsilon / d
            if kind == "linear":
                # the stretch of x -> r x is position-independent, so the base
                # may be rescaled (homogeneity) to keep x + epsilon representable
                x = x / float(np.max(np.abs(x)))
            y = x + delta
    return total / steps
