"""
Config-driven rate sweeps and their CSV/JSON reports.

A sweep runs the Monte-Carlo risk at each n of a grid with the bandwidth rule,
then fits the log-log slope of risk against n and compares it with
-2s / (2s + 2nu + dim).
"""

from dataclasses import dataclass, field
import json
import math
import os
from pathlib import Path
import subprocess
from typing import Optional
import warnings

import numpy as np

from . import __version__
from .densities import DENSITY_NAMES, DeformationDensity, make_density
from .errors import ConfigError, IllConditionedError
from .estimator import EstimatorConfig, TRUTH_NAMES, bandwidth_T, make_truth, mc_risk
from .groups import GroupSpec, get_group, spectral_count
from .harmonic import FourierCoefficients, smoothness_profile
from .simulate import substream

CSV_HEADER = ("n", "T", "mean_risk", "std_error", "bias_sq", "variance_term", "tail_term")
SCHEMA_VERSION = "1.0"
NU_TOLERANCE = 0.15
DEFAULT_PROFILE_CUTOFF = {"Torus1": 1025.0, "Torus2": 1025.0, "SO3": 601.0}


def fmt_float(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def dumps17(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written by :func:`fmt_float`; NaN/inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps17(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# ---------------------------------------------------------------------------
# config

@dataclass
class ExperimentConfig:
    group: str
    truth_name: str
    density_name: str
    epsilon: float
    s: float
    nu: float
    A: float
    n_grid: list
    replicates: int
    seed: int
    output: Optional[str] = None
    truth_params: dict = field(default_factory=dict)
    density_params: dict = field(default_factory=dict)
    threads: int = 1
    profile_cutoff: Optional[float] = None
    synthetic_risk: Optional[dict] = None

    _REQUIRED = ("group", "truth_name", "density_name", "epsilon", "s", "nu", "A",
                 "n_grid", "replicates", "seed")

    def __post_init__(self):
        self.validate()

    @property
    def group_spec(self) -> GroupSpec:
        return get_group(self.group)

    def validate(self):
        try:
            g = get_group(self.group)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None
        self.group = g.name
        if self.truth_name not in TRUTH_NAMES:
            raise ConfigError(f"truth_name must be one of {TRUTH_NAMES}, got {self.truth_name!r}")
        if self.density_name not in DENSITY_NAMES:
            raise ConfigError(f"density_name must be one of {DENSITY_NAMES}, got {self.density_name!r}")
        for key in ("epsilon", "s", "nu", "A"):
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ConfigError(f"{key} must be a finite number")
            setattr(self, key, float(val))
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        EstimatorConfig(self.s, self.nu, self.A).validate(g)
        grid = list(self.n_grid) if isinstance(self.n_grid, (list, tuple)) else None
        if not grid or any(isinstance(n, bool) or not isinstance(n, int) for n in grid):
            raise ConfigError("n_grid must be a non-empty list of integers")
        if any(n < 2 for n in grid):
            raise ConfigError("every n in n_grid must be >= 2")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        self.n_grid = grid
        if isinstance(self.replicates, bool) or not isinstance(self.replicates, int) or self.replicates < 8:
            raise ConfigError("replicates must be an integer >= 8")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        if self.synthetic_risk is not None:
            if not isinstance(self.synthetic_risk, dict) or "scale" not in self.synthetic_risk:
                raise ConfigError("synthetic_risk needs a 'scale' (and optional 'exponent')")
        return self

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        missing = [k for k in cls._REQUIRED if k not in doc]
        if missing:
            raise ConfigError(f"config is missing {', '.join(missing)}")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        doc = dict(doc)
        if base_dir is not None and doc.get("output"):
            out = Path(doc["output"])
            doc["output"] = os.path.normpath(out if out.is_absolute() else Path(base_dir) / out)
        return cls(**doc)

    @classmethod
    def load(cls, path):
        """Read a JSON config; a relative ``output`` resolves against the config's folder."""
        path = Path(path)
        text = path.read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc, base_dir=path.parent)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def density(self) -> DeformationDensity:
        try:
            return make_density(self.density_name, self.group, **self.density_params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"density {self.density_name!r}: {exc}") from None

    def truth(self) -> FourierCoefficients:
        try:
            return make_truth(self.truth_name, self.group, self.s, self.A, **self.truth_params)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"truth {self.truth_name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# slope fitting

def fit_loglog_slope(pairs):
    """Weighted least squares of log risk on log n.

    ``pairs`` holds (n, risk, std_error).  Weights are 1 / sigma^2 with the
    delta-method sigma = std_error / risk; if any std_error is zero the fit is
    unweighted.  The slope's standard error is inflated by the reduced
    chi-square when that exceeds one.

    Returns
    -------
    (slope, stderr) : tuple of float
        ``(None, None)`` when fewer than two distinct n are given.
    """
    pairs = [(float(n), float(r), float(se)) for n, r, se in pairs]
    if any(not r > 0 for _, r, _ in pairs):
        raise ValueError("log-log fit needs strictly positive risks")
    if len({n for n, _, _ in pairs}) < 2:
        return None, None
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    se = np.array([p[2] for p in pairs])
    if np.all(se > 0):
        w = (np.array([p[1] for p in pairs]) / se) ** 2
        known = True
    else:
        w = np.ones_like(x)
        known = False
    X = np.column_stack([np.ones_like(x), x])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    resid = y - X @ beta
    dof = len(x) - 2
    chi2 = float(np.sum(w * resid ** 2))
    if known:
        scale = max(1.0, chi2 / dof) if dof > 0 else 1.0
    else:
        scale = chi2 / dof if dof > 0 else 0.0
    return float(beta[1]), float(math.sqrt(cov[1, 1] * scale))


def theoretical_slope(s, nu, dim) -> float:
    return -2 * s / (2 * s + 2 * nu + dim)


# ---------------------------------------------------------------------------
# risk table

@dataclass
class RiskRow:
    n: int
    T: float
    mean_risk: float
    std_error: float
    bias_sq: float
    variance_term: float
    tail_term: float

    def as_tuple(self):
        return (self.n, self.T, self.mean_risk, self.std_error, self.bias_sq, self.variance_term,
                self.tail_term)


@dataclass
class RiskTable:
    rows: list
    fitted_slope: Optional[float]
    slope_stderr: Optional[float]
    theoretical_slope: float
    nu_nominal: float = 0.0
    nu_hat: Optional[float] = None
    nu_used: float = 0.0
    supersmooth: bool = False
    warnings: list = field(default_factory=list)
    profile: Optional[dict] = None

    def csv_text(self) -> str:
        lines = [",".join(CSV_HEADER)]
        for r in self.rows:
            lines.append(",".join([str(int(r.n))] + [fmt_float(v) for v in r.as_tuple()[1:]]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        Path(path).write_text(self.csv_text())

    def report(self, config: Optional[ExperimentConfig] = None) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "version": version_string(),
            "config": config.to_dict() if config is not None else None,
            "table": {
                "columns": list(CSV_HEADER),
                "rows": [dict(zip(CSV_HEADER, r.as_tuple())) for r in self.rows],
                "fitted_slope": self.fitted_slope,
                "slope_stderr": self.slope_stderr,
                "theoretical_slope": self.theoretical_slope,
            },
            "nu": {
                "nominal": self.nu_nominal,
                "profiled": self.nu_hat,
                "used": self.nu_used,
                "tolerance": NU_TOLERANCE,
                "supersmooth": self.supersmooth,
                "profile": self.profile,
            },
            "warnings": list(self.warnings),
        }

    def report_json(self, config=None) -> str:
        return dumps17(self.report(config)) + "\n"

    def write(self, csv_path, config=None):
        """CSV at ``csv_path`` and the JSON report beside it (same stem, .json)."""
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        self.write_csv(csv_path)
        json_path = csv_path.with_suffix(".json")
        json_path.write_text(self.report_json(config))
        return csv_path, json_path


def profile_density(h: DeformationDensity, cutoff: float):
    """Smoothness profile up to ``cutoff``, stopping before the first non-invertible irrep.

    Returns (profile or None, list of warning strings).
    """
    notes = []
    try:
        return smoothness_profile(h.coefficients(cutoff)), notes
    except IllConditionedError as exc:
        from .groups import make_irrep

        lam = make_irrep(h.group, exc.irrep).lambda_pi
        notes.append(f"kernel not invertible at irrep {exc.irrep} (lambda={lam:g}); "
                     f"profile restricted to lambda < {lam:g}")
        if lam <= 0:
            return None, notes
        return smoothness_profile(h.coefficients(lam)), notes


def run_rate_sweep(config: ExperimentConfig, *, threads: Optional[int] = None) -> RiskTable:
    """Monte-Carlo risk at each n of the grid and the fitted log-log slope.

    Sample size n uses the random substream keyed by n itself, so adding or
    removing grid points leaves the other rows unchanged.
    """
    config.validate()
    group = config.group_spec
    h = config.density()
    truth = config.truth()
    notes = []

    cutoff = config.profile_cutoff or DEFAULT_PROFILE_CUTOFF[group.name]
    prof, msgs = profile_density(h, cutoff)
    notes.extend(msgs)
    nu_hat = prof.nu_hat if prof is not None else None
    nu_used = config.nu
    if nu_hat is None:
        notes.append("could not profile nu; using the nominal value")
    elif abs(nu_hat - config.nu) > NU_TOLERANCE:
        notes.append(f"nominal nu={config.nu:g} and profiled nu_hat={nu_hat:.4g} differ by more than "
                     f"{NU_TOLERANCE}; bandwidth uses nu_hat")
        nu_used = max(0.0, nu_hat)
    if prof is not None and prof.supersmooth:
        notes.append("kernel coefficients decay exponentially (supersmooth); polynomial nu is nominal")
    if config.s <= 2 * nu_used + group.dim:
        notes.append(f"s={config.s:g} <= 2 nu + dim = {2 * nu_used + group.dim:g}; "
                     "outside the regime with a proven upper rate")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    est_cfg = EstimatorConfig(config.s, nu_used, config.A)
    workers = threads if threads is not None else config.threads
    rows = []
    for n in config.n_grid:
        if config.synthetic_risk is not None:
            scale = float(config.synthetic_risk["scale"])
            expo = float(config.synthetic_risk.get("exponent", theoretical_slope(config.s, nu_used, group.dim)))
            T = bandwidth_T(n, config.s, nu_used, group.dim)
            rows.append(RiskRow(n, T, scale * n ** expo, 0.0, 0.0, 0.0, 0.0))
            continue
        r = mc_risk(truth, h, n, config.epsilon, est_cfg, config.replicates,
                    substream(config.seed, n), threads=workers)
        rows.append(RiskRow(n, r.T, r.mean_risk, r.std_error, r.bias_sq, r.variance_term, r.tail_term))
    slope, stderr = fit_loglog_slope([(r.n, r.mean_risk, r.std_error) for r in rows])
    return RiskTable(
        rows, slope, stderr, theoretical_slope(config.s, nu_used, group.dim),
        nu_nominal=config.nu, nu_hat=nu_hat, nu_used=nu_used,
        supersmooth=bool(prof.supersmooth) if prof is not None else False,
        warnings=notes, profile=prof.to_dict() if prof is not None else None,
    )


# ---------------------------------------------------------------------------
# spectral counting

def weyl_check(group, tmin: float = 1e2, tmax: float = 1e5, points: int = 13):
    """Fit log sum_{lambda<T} d^2 against log T on a geometric T grid.

    Returns a dict with the fitted exponent, the expected dim/2 and the rows.
    """
    group = get_group(group)
    if not 0 < tmin < tmax:
        raise ValueError("need 0 < tmin < tmax")
    Ts = np.geomspace(tmin, tmax, int(points))
    counts = [spectral_count(group, T)[1] for T in Ts]
    slope, intercept = np.polyfit(np.log(Ts), np.log(counts), 1)
    return {
        "group": group.name,
        "exponent": float(slope),
        "expected": group.dim / 2,
        "constant": float(math.exp(intercept)),
        "rows": [{"T": float(T), "sum_d2": int(c)} for T, c in zip(Ts, counts)],
    }
