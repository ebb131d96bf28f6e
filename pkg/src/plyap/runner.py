"""Experiment orchestration: declarative configs in, data files and plots out.

Every run is deterministic given its config; CSV outputs use fixed 17
significant digit formatting so reruns are byte-identical, and every output
file embeds the config hash.
"""

import concurrent.futures
import datetime
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import (
    GridDensity,
    baker_map,
    evolve_linear_analytic,
    koopman_step,
    r_adic_map,
    square_density,
    sqrt_embed,
    transfer_step,
)
from .errors import (
    ConfigError,
    DegeneratePathError,
    InsufficientDataError,
    PlyapError,
    SaturationError,
)
from .estimators import (
    asymptotic_estimate,
    detect_saturation,
    divergence_series,
    ingest_overlap_series,
    read_overlap_csv,
)
from .geometry import GridBasis1D, GridBasis2D, ProjectiveState
from .quantum import GaussianState, QuadraticSystem, bvs_baker, bvs_coherent_state, gaussian_autocorrelation
from .series import DEFAULT_THETA, series_from_log_overlaps
from .svgplot import render_line_plot

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "run",
    "figure",
    "ingest",
    "selftest",
    "FIGURE_IDS",
    "SUMMARY_SCHEMA",
    "validate_summary",
]

_SYSTEMS = (
    "linear",
    "r_adic",
    "baker_classical",
    "baker_koopman",
    "oscillator",
    "barrier",
    "bvs_baker",
    "overlap_file",
)

_MAP_SYSTEMS = ("r_adic", "baker_classical", "baker_koopman", "bvs_baker")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, JSON-serializable description of one experiment."""

    id: str
    system: str
    steps: int = 40
    dt: float = 1.0
    # system parameters; which ones apply depends on `system`
    r: float | None = None
    b: float | None = None
    init_width: float | None = None
    grid_n: int | None = None
    grid_m: int | None = None
    omega: float | None = None
    omega0: float | None = None
    n_dim: int | None = None
    q0: float | None = None
    p0: float | None = None
    alpha: float | None = None
    path: str | None = None
    convention: str = "amplitude"
    # estimator settings
    mode: str = "regression"
    theta: float = DEFAULT_THETA
    delta_index: int = 1
    window: tuple | None = None
    stable_threshold: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.id or any(ch in self.id for ch in "/\\ \t\n"):
            raise ConfigError(f"id {self.id!r} is not filesystem-safe", field="id")
        if self.system not in _SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}", field="system")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1", field="steps")
        if not self.dt > 0:
            raise ConfigError("dt must be positive", field="dt")
        if self.system in _MAP_SYSTEMS and self.dt != int(self.dt):
            raise ConfigError("map systems need an integer dt (map steps per sample)", field="dt")
        if self.mode not in ("regression", "pointwise"):
            raise ConfigError(f"unknown mode {self.mode!r}", field="mode")
        if not 0.0 <= self.theta < np.pi / 2:
            raise ConfigError("theta must lie in [0, pi/2)", field="theta")
        if self.delta_index < 1:
            raise ConfigError("delta_index must be >= 1", field="delta_index")
        if self.window is not None:
            w = tuple(self.window)
            if len(w) != 2:
                raise ConfigError("window must be [t1, t2]", field="window")
            object.__setattr__(self, "window", w)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}", field=key)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["window"] is not None:
            d["window"] = list(d["window"])
        return d

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    distance: object
    divergence: object
    curve: np.ndarray | None
    estimate: object | None
    classification: str
    saturation_time: float | None
    summary: dict
    out_dir: Path | None = None
    defaults: dict = field(default_factory=dict)


def _slab_density_2d(n: int, width: float) -> GridDensity:
    # vertical slab [0, width) x [0, 1): its baker self-overlap is the exact
    # intersection measure 2^-t (full rate ln 2; the invertible map has no
    # pushforward dilution to halve it)
    geom = GridBasis2D(n, n)
    cells = max(1, int(round(width * n)))
    values = np.zeros((n, n))
    values[:cells, :] = n / cells
    return GridDensity(values, geom)


def _build_series(cfg: ExperimentConfig, defaults: dict):
    """Produce the (DistanceSeries, DivergenceSeries) pair for a config."""
    if cfg.system == "linear":
        r = cfg.r if cfg.r is not None else defaults.setdefault("r", 2.0)
        b = cfg.b if cfg.b is not None else defaults.setdefault("b", 1.0)
        return evolve_linear_analytic(b, r, cfg.steps, theta=cfg.theta)

    if cfg.system == "r_adic":
        r = int(cfg.r) if cfg.r is not None else defaults.setdefault("r", 2)
        n = cfg.grid_n if cfg.grid_n is not None else defaults.setdefault("grid_n", 2**16)
        width = (
            cfg.init_width
            if cfg.init_width is not None
            else defaults.setdefault("init_width", 2.0**-10)
        )
        grid = GridBasis1D(n, 0.0, 1.0)
        rho = square_density(width, grid)
        ref = sqrt_embed(rho)
        states = [ref]
        m = r_adic_map(r)
        for _ in range(cfg.steps):
            rho = transfer_step(rho, m)
            states.append(sqrt_embed(rho))
        times = np.arange(cfg.steps + 1) * cfg.dt
        return divergence_series(times, states, ref, theta=cfg.theta)

    if cfg.system in ("baker_classical", "baker_koopman"):
        m_exp = cfg.grid_m if cfg.grid_m is not None else defaults.setdefault("grid_m", 10)
        width = (
            cfg.init_width
            if cfg.init_width is not None
            else defaults.setdefault("init_width", 2.0**-8)
        )
        n = 2**m_exp
        rho = _slab_density_2d(n, width)
        bmap = baker_map()
        ref = sqrt_embed(rho)
        states = [ref]
        if cfg.system == "baker_classical":
            cur = rho
            for _ in range(cfg.steps):
                cur = transfer_step(cur, bmap)
                states.append(sqrt_embed(cur))
        else:
            cur = ref
            for _ in range(cfg.steps):
                cur = koopman_step(cur, bmap)
                states.append(cur)
        times = np.arange(cfg.steps + 1) * cfg.dt
        return divergence_series(times, states, ref, theta=cfg.theta)

    if cfg.system in ("oscillator", "barrier"):
        if cfg.omega is None:
            raise ConfigError(f"{cfg.system} needs omega", field="omega")
        sign = +1 if cfg.system == "oscillator" else -1
        default_w0 = cfg.omega / 2.0 if sign > 0 else 1.0
        omega0 = (
            cfg.omega0 if cfg.omega0 is not None else defaults.setdefault("omega0", default_w0)
        )
        sys = QuadraticSystem(cfg.omega, sign=sign)
        g = GaussianState(omega0)
        times = np.arange(cfg.steps + 1) * cfg.dt
        v = gaussian_autocorrelation(sys, g, times)
        with np.errstate(divide="ignore"):
            return series_from_log_overlaps(times, np.log(v), theta=cfg.theta)

    if cfg.system == "bvs_baker":
        n_dim = cfg.n_dim if cfg.n_dim is not None else defaults.setdefault("n_dim", 1800)
        q0 = cfg.q0 if cfg.q0 is not None else defaults.setdefault("q0", 1.0 / 3.0)
        p0 = cfg.p0 if cfg.p0 is not None else defaults.setdefault("p0", 2.0 / 3.0)
        alpha = (
            cfg.alpha
            if cfg.alpha is not None
            else defaults.setdefault("alpha", 1.0 / (2.0 * np.pi * n_dim))
        )
        b_mat = bvs_baker(n_dim)
        psi = bvs_coherent_state(n_dim, q0, p0, alpha)
        ref = psi
        states = [psi]
        per_sample = int(cfg.dt)
        for _ in range(cfg.steps):
            amp = psi.amplitudes
            for _ in range(per_sample):
                amp = b_mat @ amp
            psi = ProjectiveState(amp, psi.basis)
            states.append(psi)
        times = np.arange(cfg.steps + 1) * cfg.dt
        return divergence_series(times, states, ref, theta=cfg.theta)

    if cfg.system == "overlap_file":
        if not cfg.path:
            raise ConfigError("overlap_file needs a path", field="path")
        raw = read_overlap_csv(cfg.path, convention=cfg.convention)
        return ingest_overlap_series(raw, theta=cfg.theta)

    raise ConfigError(f"unknown system {cfg.system!r}", field="system")


def _estimate_and_classify(cfg: ExperimentConfig, dist, div):
    """Shared estimator pipeline: plateau detection, windowing, classification."""
    t_b = detect_saturation(dist)
    start = end = None
    if cfg.window is not None:
        start, end = cfg.window
    if end is None and t_b is not None:
        # keep the fit strictly before the plateau
        half_step = 0.5 * float(np.min(np.diff(dist.times)))
        end = t_b - half_step
    window = None if (start is None and end is None) else (start, end)

    curve = None
    estimate = None
    detail = None
    try:
        estimate = asymptotic_estimate(
            div, mode=cfg.mode, window=window, delta_index=cfg.delta_index, saturation_time=t_b
        )
        curve = estimate.finite_time_curve
        lam = estimate.asymptotic_value
        classification = "stable" if abs(lam) < cfg.stable_threshold else "unstable"
    except DegeneratePathError as exc:
        classification = "stable"
        detail = f"stationary path: {exc}"
    except (SaturationError, InsufficientDataError) as exc:
        if t_b is None and isinstance(exc, InsufficientDataError):
            raise
        classification = "saturated"
        detail = str(exc)
    return curve, estimate, classification, t_b, detail


def _fmt(x) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, config_hash: str, header: str, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


SUMMARY_SCHEMA = {
    "type": "object",
    "required": [
        "id",
        "config",
        "config_hash",
        "classification",
        "lambda",
        "fit_window",
        "residual",
        "saturation_time",
        "provenance",
    ],
    "properties": {
        "id": {"type": "string"},
        "config": {"type": "object"},
        "config_hash": {"type": "string"},
        "classification": {"enum": ["stable", "unstable", "saturated"]},
        "lambda": {"type": ["number", "null"]},
        "fit_window": {"type": ["array", "null"]},
        "residual": {"type": ["number", "null"]},
        "saturation_time": {"type": ["number", "null"]},
        "detail": {"type": ["string", "null"]},
        "provenance": {"type": "object"},
    },
}

_JSON_TYPES = {
    "object": dict,
    "string": str,
    "number": (int, float),
    "array": list,
    "null": type(None),
    "boolean": bool,
}


def validate_summary(doc: dict, schema: dict = SUMMARY_SCHEMA):
    """Structural validation of a summary document against the schema."""
    if not isinstance(doc, dict):
        raise ConfigError("summary must be an object")
    for key in schema.get("required", ()):
        if key not in doc:
            raise ConfigError(f"summary missing required field {key!r}", field=key)
    for key, spec in schema.get("properties", {}).items():
        if key not in doc:
            continue
        value = doc[key]
        if "enum" in spec:
            if value not in spec["enum"]:
                raise ConfigError(f"summary field {key!r} not in {spec['enum']}", field=key)
            continue
        types = spec["type"]
        if isinstance(types, str):
            types = [types]
        allowed = tuple(_JSON_TYPES[t] for t in types)
        if not isinstance(value, allowed) or (
            isinstance(value, bool) and bool not in allowed
        ):
            raise ConfigError(f"summary field {key!r} has wrong type", field=key)
    return True


def run(config: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Execute one experiment; write CSVs and summary.json when out_dir is given."""
    defaults: dict = {}
    dist, div = _build_series(config, defaults)
    curve, estimate, classification, t_b, detail = _estimate_and_classify(config, dist, div)

    summary = {
        "id": config.id,
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "classification": classification,
        "lambda": None if estimate is None else estimate.asymptotic_value,
        "fit_window": None if estimate is None else list(estimate.fit_window),
        "residual": None if estimate is None else estimate.residual,
        "saturation_time": t_b,
        "detail": detail,
        "provenance": {
            "package_version": __version__,
            "numpy_version": np.__version__,
            "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "defaults_applied": defaults,
        },
    }
    validate_summary(summary)

    result = ExperimentResult(
        config=config,
        distance=dist,
        divergence=div,
        curve=curve,
        estimate=estimate,
        classification=classification,
        saturation_time=t_b,
        summary=summary,
        defaults=defaults,
    )
    if out_dir is not None:
        result.out_dir = _write_result(result, Path(out_dir))
    return result


def _write_result(result: ExperimentResult, out_dir: Path) -> Path:
    exp_dir = out_dir / result.config.id
    exp_dir.mkdir(parents=True, exist_ok=True)
    h = result.config.hash()
    dist, div = result.distance, result.divergence
    _write_csv(
        exp_dir / "distance.csv",
        h,
        "t,d_p,saturated",
        (
            (_fmt(t), _fmt(v), str(int(s)))
            for t, v, s in zip(dist.times, dist.values, dist.saturated)
        ),
    )
    _write_csv(
        exp_dir / "divergence.csv",
        h,
        "t,log_divergence,saturated",
        (
            (_fmt(t), _fmt(v), str(int(s)))
            for t, v, s in zip(div.times, div.log_values, div.saturated)
        ),
    )
    curve = result.curve if result.curve is not None else np.empty((0, 2))
    _write_csv(
        exp_dir / "lambda_t.csv",
        h,
        "t,lambda_t",
        ((_fmt(t), _fmt(v)) for t, v in curve),
    )
    with open(exp_dir / "summary.json", "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return exp_dir


_LN2_HALF = float(np.log(2.0) / 2.0)


def _figure_presets(fig_id: str):
    if fig_id == "fig1a":
        configs = [
            ExperimentConfig(
                id=f"fig1a-r{r}", system="linear", r=float(r), b=1.0,
                steps=40, dt=1.0, theta=0.0, window=(10.0, None),
            )
            for r in (2, 3, 5)
        ]
        hlines = [(f"ln({r})/2", float(np.log(r) / 2.0)) for r in (2, 3, 5)]
        return configs, hlines, "steps", "finite-time exponent"
    if fig_id == "fig1b":
        configs = [
            ExperimentConfig(
                id="fig1b-oscillator-w2", system="oscillator", omega=2.0, omega0=1.0,
                steps=1200, dt=0.05, theta=0.0,
            ),
            ExperimentConfig(
                id="fig1b-barrier-w2", system="barrier", omega=2.0, omega0=1.0,
                steps=300, dt=0.05, theta=0.0,
            ),
            ExperimentConfig(
                id="fig1b-barrier-w5", system="barrier", omega=5.0, omega0=1.0,
                steps=300, dt=0.02, theta=0.0,
            ),
        ]
        hlines = [("0", 0.0), ("1", 1.0), ("5/2", 2.5)]
        return configs, hlines, "time", "finite-time exponent"
    if fig_id == "fig2a":
        configs = [
            ExperimentConfig(
                id="fig2a-bvs-n1800", system="bvs_baker", n_dim=1800,
                q0=1.0 / 3.0, p0=2.0 / 3.0, alpha=1.0 / (2.0 * np.pi * 1800),
                steps=12, dt=2.0, theta=0.1, window=(0.0, None),
            ),
        ]
        hlines = [("ln(2)/2", _LN2_HALF)]
        return configs, hlines, "map steps", "finite-time exponent"
    raise ConfigError(f"unknown figure id {fig_id!r}", field="figure")


FIGURE_IDS = ("fig1a", "fig1b", "fig2a")


def _max_workers(n_jobs: int) -> int:
    env = os.environ.get("PLYAP_THREADS", "")
    if env.strip():
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"PLYAP_THREADS={env!r} is not an integer") from exc
        if cap < 1:
            raise ConfigError("PLYAP_THREADS must be >= 1")
        return min(cap, n_jobs)
    return min(4, n_jobs)


def figure(fig_id: str, out_dir) -> list:
    """Run the preset bundle for a named figure and render its SVG."""
    configs, hlines, xlabel, ylabel = _figure_presets(fig_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with concurrent.futures.ThreadPoolExecutor(_max_workers(len(configs))) as pool:
        results = list(pool.map(lambda cfg: run(cfg, out_dir=out_dir), configs))
    curves = []
    for res in results:
        curve = res.curve if res.curve is not None else np.empty((0, 2))
        curves.append((res.config.id, curve[:, 0], curve[:, 1]))
    svg = render_line_plot(curves, title=fig_id, xlabel=xlabel, ylabel=ylabel, hlines=hlines)
    (out_dir / f"{fig_id}.svg").write_text(svg)
    return results


def ingest(path, convention: str = "amplitude", out_dir=None, **estimator_kwargs) -> ExperimentResult:
    """Full estimator pipeline on an external overlap CSV."""
    stem = Path(path).stem or "ingest"
    cfg = ExperimentConfig(
        id=f"ingest-{stem}", system="overlap_file", path=str(path),
        convention=convention, **estimator_kwargs,
    )
    return run(cfg, out_dir=out_dir)


def selftest(verbose: bool = True) -> int:
    """Run the built-in property battery; returns the number of failures."""
    from .geometry import (
        DiscreteBasis,
        bounded_euclidean_distance,
        classical_divergence,
        fubini_study_distance,
        hilbert_distance,
    )
    from .ensembles import rotation_map, linear_map as _linmap
    from .estimators import trajectory_lyapunov

    rng = np.random.default_rng(20260808)

    def ray_invariance():
        basis = DiscreteBasis(6)
        a = ProjectiveState(rng.standard_normal(6) + 1j * rng.standard_normal(6), basis)
        b = ProjectiveState(rng.standard_normal(6) + 1j * rng.standard_normal(6), basis)
        c = complex(rng.standard_normal(), rng.standard_normal())
        scaled = ProjectiveState(c * a.amplitudes, basis)
        return abs(fubini_study_distance(scaled, b) - fubini_study_distance(a, b)) < 1e-12

    def composition_identity():
        return all(
            abs(classical_divergence(bounded_euclidean_distance(d)) - d) <= 1e-10 * (1.0 + d)
            for d in (0.0, 1e-6, 1.0, 1e6)
        )

    def triangle():
        basis = DiscreteBasis(5)
        for _ in range(200):
            s = [
                ProjectiveState(rng.standard_normal(5) + 1j * rng.standard_normal(5), basis)
                for _ in range(3)
            ]
            d01 = fubini_study_distance(s[0], s[1])
            d12 = fubini_study_distance(s[1], s[2])
            d02 = fubini_study_distance(s[0], s[2])
            if d02 > d01 + d12 + 1e-10:
                return False
        return True

    def bvs_unitary():
        b = bvs_baker(128)
        return float(np.max(np.abs(b.conj().T @ b - np.eye(128)))) < 1e-10

    def eq2_invariance():
        b = bvs_baker(64)
        basis = DiscreteBasis(64)
        u = ProjectiveState(rng.standard_normal(64) + 1j * rng.standard_normal(64), basis)
        v = ProjectiveState(rng.standard_normal(64) + 1j * rng.standard_normal(64), basis)
        before = hilbert_distance(u, v)
        after = hilbert_distance(
            ProjectiveState(b @ u.amplitudes, basis), ProjectiveState(b @ v.amplitudes, basis)
        )
        return abs(after - before) < 1e-10

    def mass_conserved():
        grid = GridBasis1D(4096, 0.0, 1.0)
        rho = GridDensity(rng.random(4096) + 0.1, grid)
        rho = GridDensity(rho.values / rho.mass, grid)
        out = transfer_step(rho, r_adic_map(3))
        return abs(out.mass - rho.mass) < 1e-14 and np.all(out.values >= 0.0)

    def trajectories():
        lam_lin = trajectory_lyapunov(_linmap(2.0), [0.7], steps=60)
        lam_rot = trajectory_lyapunov(rotation_map(0.37), [0.2], steps=60)
        lam_bak = trajectory_lyapunov(baker_map(), [0.312, 0.547], steps=60)
        return (
            abs(lam_lin - np.log(2.0)) < 1e-6
            and abs(lam_rot) < 1e-6
            and abs(lam_bak - np.log(2.0)) < 1e-6
        )

    def linear_exponent():
        _, div = evolve_linear_analytic(1.0, 2.0, 40)
        est = asymptotic_estimate(div, window=(10.0, 39.0))
        return abs(est.asymptotic_value / _LN2_HALF - 1.0) < 0.01

    checks = [
        ("ray invariance", ray_invariance),
        ("divergence composition identity", composition_identity),
        ("triangle inequality (200 triples)", triangle),
        ("quantized baker unitarity N=128", bvs_unitary),
        ("flat-metric invariance under the baker unitary", eq2_invariance),
        ("transfer-operator mass conservation", mass_conserved),
        ("trajectory exponents (linear, rotation, baker)", trajectories),
        ("linear-map exponent ln(2)/2", linear_exponent),
    ]
    failures = 0
    for name, check in checks:
        try:
            ok = bool(check())
        except PlyapError:
            ok = False
        failures += 0 if ok else 1
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return failures
