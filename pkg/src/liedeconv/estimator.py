"""
Spectral-cutoff deconvolution estimator, its bandwidth rule, Monte-Carlo risk
and the sign-cube (Assouad) fixture family.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from fractions import Fraction
import itertools
import math
from typing import Optional

import numpy as np

from .densities import DeformationDensity
from .errors import ConfigError, GroupMismatchError, IllConditionedError, LieDeconvError
from .groups import GroupSpec, enumerate_irreps, get_group
from .harmonic import CONDITION_LIMIT, FourierCoefficients, l2_norm_sq, sobolev_norm_sq
from .simulate import ObservationSet, as_seed_sequence, simulate_dataset, substream


@dataclass(frozen=True)
class EstimatorConfig:
    """Smoothness s of the truth, ill-posedness nu of h, Sobolev radius A.

    ``cutoff_override`` replaces the bandwidth rule with a fixed T.
    """

    s: float
    nu: float
    A: float = 1.0
    cutoff_override: Optional[float] = None

    def validate(self, group: GroupSpec):
        if not self.s > group.dim / 2:
            raise ConfigError(f"s = {self.s} must exceed dim/2 = {group.dim / 2}")
        if not self.nu >= 0:
            raise ConfigError(f"nu = {self.nu} must be >= 0")
        if not self.A > 0:
            raise ConfigError(f"A = {self.A} must be > 0")
        if self.cutoff_override is not None and not self.cutoff_override > 0:
            raise ConfigError("cutoff_override must be > 0")
        return self

    def cutoff(self, n: int, dim: int) -> float:
        if self.cutoff_override is not None:
            return float(self.cutoff_override)
        return bandwidth_T(n, self.s, self.nu, dim)


def bandwidth_T(n: int, s: float, nu: float, dim: int) -> float:
    """floor(n ** (2 / (2s + 2nu + dim))) as a float.

    Near-integer powers are settled in exact rational arithmetic so that, e.g.,
    an exact integer power is not floored one step too low by rounding.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1.0
    expo = Fraction(2) / (2 * Fraction(s) + 2 * Fraction(nu) + dim)
    val = n ** float(expo)
    k = math.floor(val)
    # val = n^(p/q): k^q <= n^p decides floor exactly for candidates near val
    p, q = expo.numerator, expo.denominator
    if q <= 64 and p <= 64:
        for cand in (k + 1, k):
            if cand >= 1 and abs(val - cand) < 1e-6 * max(1.0, val):
                return float(cand if cand ** q <= n ** p else cand - 1)
    return float(k)


def _solve_right(Y, C, irrep):
    """X with X C = Y, refusing ill-conditioned C."""
    sv = np.linalg.svd(C, compute_uv=False)
    cond = np.inf if sv[-1] * sv[-1] == 0 else sv[0] / sv[-1]
    if not cond < CONDITION_LIMIT:
        raise IllConditionedError(
            f"c_pi(h) for irrep {irrep.index} has condition number {cond:.3e} >= {CONDITION_LIMIT:g}",
            irrep=irrep.index, condition=cond)
    # X C = Y  <=>  C^T X^T = Y^T
    return np.linalg.solve(C.T, Y.T).T


def check_invertible(h_coeffs: FourierCoefficients):
    """Raise IllConditionedError for the first irrep whose c_pi(h) cannot be inverted."""
    for p, C in h_coeffs.items():
        _solve_right(np.zeros_like(C), C, p)


def deconvolve_estimate(obs: ObservationSet, h: DeformationDensity, T: float) -> FourierCoefficients:
    """c_hat_pi = mean_m c_pi(Y_m) c_pi(h)^-1 for every lambda_pi < T."""
    if obs.group != h.group:
        raise GroupMismatchError(f"observations on {obs.group}, density on {h.group}")
    irreps = enumerate_irreps(obs.group, T)
    if len(irreps) > len(obs.irreps) or any(a != b for a, b in zip(irreps, obs.irreps)):
        raise ValueError(f"observations (cutoff {obs.cutoff}) do not cover cutoff {T}")
    hc = h.coefficients(T)
    blocks = []
    for i, p in enumerate(irreps):
        blocks.append(_solve_right(obs.blocks[i].mean(axis=0), hc.blocks[i], p))
    return FourierCoefficients(obs.group, T, blocks)


def risk_of(estimate: FourierCoefficients, truth: FourierCoefficients) -> float:
    """sum_pi d_pi ||c_hat_pi - c_pi(f*)||_F^2 over the union of both supports."""
    if estimate.group != truth.group:
        raise GroupMismatchError(f"estimate on {estimate.group}, truth on {truth.group}")
    top = max(estimate.cutoff, truth.cutoff)
    return l2_norm_sq(estimate.extend(top) - truth.extend(top))


def tail_term(truth: FourierCoefficients, T: float) -> float:
    """sum over lambda_pi >= T of d_pi ||c_pi(f*)||_F^2."""
    return float(sum(p.dim_pi * np.vdot(c, c).real for p, c in truth.items() if p.lambda_pi >= T))


@dataclass
class RiskEstimate:
    """Monte-Carlo risk at one (n, T).

    ``bias_sq`` is ||mean(c_hat) - c||^2 plus the tail; it carries an upward
    contamination of ``variance_term / replicates`` from averaging a finite
    number of estimates, reported as ``bias_contamination``.  With these
    definitions ``bias_sq + variance_term (R-1)/R == mean_risk``.
    """

    mean_risk: float
    std_error: float
    replicates: int
    bias_sq: float
    variance_term: float
    tail_term: float
    bias_contamination: float = 0.0
    n: int = 0
    T: float = 0.0
    epsilon: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def debiased_bias_sq(self) -> float:
        return self.bias_sq - self.bias_contamination

    def to_dict(self):
        return asdict(self)


def _flatten(c: FourierCoefficients):
    return np.concatenate([b.ravel() for b in c.blocks]) if c.blocks else np.zeros(0, complex)


def _weights(c: FourierCoefficients):
    return np.concatenate([np.full(p.dim_pi ** 2, float(p.dim_pi)) for p in c.irreps]) if c.irreps \
        else np.zeros(0)


def replicate_estimates(truth: FourierCoefficients, h: DeformationDensity, n: int, epsilon: float,
                        T: float, replicates: int, seed, *, threads: int = 1):
    """Estimates from ``replicates`` independent datasets, flattened.

    Returns (template, array of shape (replicates, K)) where ``template`` is
    the truth restricted to the estimator band, giving the layout.
    Replicate r uses substream r of ``seed``.
    """
    if truth.group != h.group:
        raise GroupMismatchError(f"truth on {truth.group}, density on {h.group}")
    sim_truth = truth.truncate(T) if T <= truth.cutoff else truth.extend(T)
    check_invertible(h.coefficients(T))
    ss = as_seed_sequence(seed)

    def one(r):
        try:
            obs = simulate_dataset(sim_truth, h, n, epsilon, substream(ss, r))
            return _flatten(deconvolve_estimate(obs, h, T))
        except IllConditionedError as exc:
            raise IllConditionedError(f"at n={n}, replicate={r}: {exc}", exc.irrep, exc.condition) from exc
        except LieDeconvError as exc:
            raise type(exc)(f"at n={n}, replicate={r}: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(replicates)))
    else:
        rows = [one(r) for r in range(replicates)]
    return sim_truth, np.array(rows).reshape(replicates, -1)


def mc_risk(truth: FourierCoefficients, h: DeformationDensity, n: int, epsilon: float,
            config: EstimatorConfig, replicates: int, seed, *, threads: int = 1) -> RiskEstimate:
    """Monte-Carlo quadratic risk of the estimator at sample size n.

    The estimator uses ``config.cutoff(n, dim)``; risk is measured against the
    full truth so truncation beyond the cutoff appears in ``tail_term``.
    """
    replicates = int(replicates)
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    config.validate(truth.group)
    T = config.cutoff(n, truth.group.dim)
    band, est = replicate_estimates(truth, h, n, epsilon, T, replicates, seed, threads=threads)
    c = _flatten(band)
    w = _weights(band)
    tail = tail_term(truth, T)
    risks = (np.abs(est - c) ** 2) @ w + tail
    mean_est = est.mean(axis=0)
    bias_band = float(np.abs(mean_est - c) ** 2 @ w)
    variance = float((np.abs(est - mean_est) ** 2 @ w).sum() / (replicates - 1))
    return RiskEstimate(
        mean_risk=float(risks.mean()),
        std_error=float(risks.std(ddof=1) / math.sqrt(replicates)),
        replicates=replicates,
        bias_sq=bias_band + tail,
        variance_term=variance,
        tail_term=tail,
        bias_contamination=variance / replicates,
        n=int(n),
        T=float(T),
        epsilon=float(epsilon),
        config={"s": config.s, "nu": config.nu, "A": config.A, "cutoff_override": config.cutoff_override},
    )


def exact_noise_risk(h_coeffs: FourierCoefficients, n: int, epsilon: float) -> float:
    """Variance of the estimator over the band of ``h_coeffs``:
    eps^2/n * sum_pi d_pi sum_ij |(c_pi(h)^-1)_ij|^2."""
    total = 0.0
    for p, C in h_coeffs.items():
        inv = np.linalg.inv(C)
        total += p.dim_pi * float(np.vdot(inv, inv).real)
    return epsilon ** 2 / n * total


# ---------------------------------------------------------------------------
# sign cube

@dataclass(frozen=True)
class AssouadMember:
    """One test function: coefficients sqrt(mu) * w on the annulus D <= lambda < 2D."""

    coeffs: FourierCoefficients
    w: dict
    mu: float

    @property
    def signs(self):
        return {k: np.sign(v.real).astype(int) for k, v in self.w.items()}


def annulus(group, D: float):
    """Irreps with D <= lambda < 2D."""
    group = get_group(group)
    return [p for p in enumerate_irreps(group, 2 * D) if p.lambda_pi >= D]


def assouad_mu(group, D: float, s: float, kappa: float) -> float:
    group = get_group(group)
    return kappa * D ** (-s - group.dim / 2)


def assouad_kappa(group, D: float, s: float, A: float) -> float:
    """Largest kappa with mu_D sum d^2 <= 2^-s D^-s A^2 / 2, which keeps every member in the ball."""
    group = get_group(group)
    K = sum(p.dim_pi ** 2 for p in annulus(group, D))
    if K == 0:
        raise ValueError(f"empty annulus at D = {D}")
    return 2.0 ** (-s) * D ** (group.dim / 2) * A ** 2 / (2 * K)


def assouad_family(group, D: float, s: float, kappa: float, rng_or_enumeration="enumerate",
                   count: int = 16):
    """Sign-cube family f_w with w_pi entries in {+-d_pi^-1/2}.

    Parameters
    ----------
    rng_or_enumeration : "enumerate" or int seed / Generator
        "enumerate" lists all 2^(sum d^2) members (allowed up to 20 signs);
        otherwise ``count`` members with independent fair signs are drawn.
    """
    group = get_group(group)
    ring = annulus(group, D)
    if not ring:
        raise ValueError(f"empty annulus D <= lambda < 2D at D = {D}")
    K = sum(p.dim_pi ** 2 for p in ring)
    mu = assouad_mu(group, D, s, kappa)
    if isinstance(rng_or_enumeration, str):
        if rng_or_enumeration != "enumerate":
            raise ValueError("rng_or_enumeration must be 'enumerate', a seed or a Generator")
        if K > 20:
            raise ValueError(f"full enumeration needs sum d^2 <= 20, got {K}")
        patterns = (np.array(bits, dtype=float) for bits in itertools.product((1.0, -1.0), repeat=K))
    else:
        rng = rng_or_enumeration
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        patterns = (rng.choice((-1.0, 1.0), size=K) for _ in range(count))
    base = FourierCoefficients.zeros(group, 2 * D)
    members = []
    for signs in patterns:
        w = {}
        c = base
        pos = 0
        for p in ring:
            d = p.dim_pi
            wp = signs[pos:pos + d * d].reshape(d, d) / math.sqrt(d) + 0j
            pos += d * d
            w[p.index] = wp
            c = c.replace(p.index, math.sqrt(mu) * wp)
        members.append(AssouadMember(c, w, mu))
    return members


# ---------------------------------------------------------------------------
# truth fixtures

def scale_to_radius(c: FourierCoefficients, s: float, A: float) -> FourierCoefficients:
    """Rescale so the Sobolev norm equals A exactly."""
    norm = math.sqrt(sobolev_norm_sq(c, s))
    if norm == 0:
        raise ValueError("cannot scale the zero function")
    return c * (A / norm)


def zero_truth(group, cutoff: float) -> FourierCoefficients:
    return FourierCoefficients.zeros(get_group(group), cutoff)


def poly_truth(group, s: float, A: float = 1.0, decay: float = 1.85, band: Optional[float] = None,
               seed: int = 0) -> FourierCoefficients:
    """Truth with ||c_pi||_F proportional to (1 + lambda_pi)^(-decay), at Sobolev radius A.

    Torus coefficients are real and positive; SO(3) blocks use a fixed random
    direction (``seed``) of the prescribed norm.  ``band`` is the lambda cutoff
    of the support (default: degree 512 on tori, 48 on SO(3)).
    """
    group = get_group(group)
    if band is None:
        band = 512 ** 2 + 1 if group.is_torus else 48 * 49 + 1
    rng = np.random.default_rng(seed)

    def block(p):
        amp = (1.0 + p.lambda_pi) ** (-decay)
        if p.dim_pi == 1:
            return np.array([[amp + 0j]])
        z = rng.standard_normal((p.dim_pi, p.dim_pi)) + 1j * rng.standard_normal((p.dim_pi, p.dim_pi))
        return amp * z / np.linalg.norm(z)

    return scale_to_radius(FourierCoefficients.from_function(group, band, block), s, A)


def single_frequency_truth(group, index, s: float, A: float = 1.0) -> FourierCoefficients:
    """One nonzero irrep, scaled to radius A; the worst case for the bias at its lambda."""
    from .groups import make_irrep

    group = get_group(group)
    p = make_irrep(group, index)
    c = FourierCoefficients.zeros(group, p.lambda_pi + 1)
    blk = np.eye(p.dim_pi, dtype=complex) if p.dim_pi > 1 else np.ones((1, 1), complex)
    return scale_to_radius(c.replace(p.index, blk), s, A)


TRUTH_NAMES = ("zero", "poly", "single", "assouad")


def make_truth(name: str, group, s: float, A: float = 1.0, **params) -> FourierCoefficients:
    """Truth fixture by name (used by configs and the CLI)."""
    group = get_group(group)
    if name == "zero":
        return zero_truth(group, params.get("cutoff", 2.0))
    if name == "poly":
        return poly_truth(group, s, A, **params)
    if name == "single":
        index = params["index"]
        return single_frequency_truth(group, tuple(index) if isinstance(index, list) else index, s, A)
    if name == "assouad":
        D = float(params["D"])
        kappa = params.get("kappa", assouad_kappa(group, D, s, A))
        return assouad_family(group, D, s, kappa, params.get("seed", 0), count=1)[0].coeffs
    raise ValueError(f"unknown truth {name!r}; choose from {', '.join(TRUTH_NAMES)}")
