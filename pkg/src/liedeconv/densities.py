"""
Deformation densities on G and exact sampling from them.

Every density carries closed-form (or exactly recomputed) Fourier
coefficients, so the deconvolution step never relies on an estimate of h.

Catalog (see :func:`make_density`):

``uniform``     h = 1 on any group; only the trivial coefficient is nonzero.
``cosine``      T^1: 1 + a cos(2 pi x), |a| <= 1.  c_{+-1} = a/2.
``poly_decay``  T^1: band-limited sum with c_l = (1 + l^2)^(-nu/2), |l| <= band,
                clipped at zero and renormalized if the truncated sum dips
                negative (coefficients are then recomputed from the clipped
                function).  Smooth of order nu.
``heat``        heat kernel, c_pi = exp(-t lambda_pi) Id, on T^1, T^2 or SO(3).
                Supersmooth; for small t it is nearly flat over low bands.
``bump``        SO(3): cos^(2k)(theta/2) around the identity, theta the rotation
                angle.  Band-limited to degree k, scalar coefficients.
``product``     T^2 products of two T^1 densities (see :func:`product_density`).
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np

from .errors import SamplerError
from .groups import (
    GroupElement,
    GroupSpec,
    IrrepDescriptor,
    TORUS1,
    TORUS2,
    SO3,
    get_group,
    haar_sample_array,
    make_irrep,
    rotation_angle,
)
from .harmonic import FourierCoefficients

ACCEPTANCE_FLOOR = 1e-4
ACCEPTANCE_WINDOW = 100_000
_MAX_BATCH = 1 << 17


@dataclass(frozen=True)
class DeformationDensity:
    """A probability density h on G (w.r.t. normalized Haar measure).

    ``density_eval`` maps a raw point array (N, ncoords) to h values;
    ``coefficient_fn`` maps an irrep to the exact matrix c_pi(h);
    ``sampler(rng, size)``, when given, draws directly instead of by rejection.
    """

    name: str
    group: GroupSpec
    density_eval: Callable = field(repr=False)
    density_sup: float
    coefficient_fn: Callable = field(repr=False)
    params: dict = field(default_factory=dict)
    sampler: Optional[Callable] = field(default=None, repr=False)
    default_cutoff: float = 20.0

    def __call__(self, g: GroupElement) -> float:
        return float(self.density_eval(g.array[None, :])[0])

    def coefficients(self, cutoff) -> FourierCoefficients:
        return FourierCoefficients.from_function(self.group, cutoff, self.coefficient_fn)

    @property
    def coeffs(self) -> FourierCoefficients:
        return self.coefficients(self.default_cutoff)

    def describe(self):
        return {"name": self.name, "group": self.group.name, "params": dict(self.params)}


def _scalar(value, p: IrrepDescriptor):
    return np.eye(p.dim_pi) * value


# ---------------------------------------------------------------------------
# catalog

def uniform_density(group: GroupSpec) -> DeformationDensity:
    return DeformationDensity(
        "uniform", group,
        density_eval=lambda pts: np.ones(np.atleast_2d(pts).shape[0]),
        density_sup=1.0,
        coefficient_fn=lambda p: _scalar(1.0 if p.is_trivial else 0.0, p),
    )


def cosine_density(a=0.5) -> DeformationDensity:
    """1 + a cos(2 pi x) on the circle."""
    a = float(a)
    if abs(a) > 1:
        raise ValueError("cosine density needs |a| <= 1")

    def coef(p):
        if p.index == 0:
            return _scalar(1.0, p)
        return _scalar(a / 2 if abs(p.index) == 1 else 0.0, p)

    return DeformationDensity(
        "cosine", TORUS1,
        density_eval=lambda pts: 1 + a * np.cos(2 * np.pi * np.atleast_2d(pts)[:, 0]),
        density_sup=1 + abs(a),
        coefficient_fn=coef,
        params={"a": a},
    )


def _cosine_series(x, amps):
    """amps[0] + 2 sum_{l>=1} amps[l] cos(2 pi l x) by the Chebyshev recurrence."""
    theta = 2 * np.pi * x
    c1 = np.cos(theta)
    prev = np.ones_like(x)
    cur = c1
    out = np.full_like(x, amps[0])
    for l in range(1, len(amps)):
        out += 2 * amps[l] * cur
        prev, cur = cur, 2 * c1 * cur - prev
    return out


def poly_decay_density(nu=1.0, band=64, fine_grid=1 << 16) -> DeformationDensity:
    """Band-limited circle density with ``c_l = (1 + l^2)^(-nu/2)`` for ``|l| <= band``."""
    nu = float(nu)
    band = int(band)
    amps = (1.0 + np.arange(band + 1) ** 2.0) ** (-nu / 2)
    x = np.arange(fine_grid) / fine_grid
    vals = _cosine_series(x, amps)
    clipped = bool(vals.min() < 0)
    if not clipped:
        def coef(p):
            l = abs(p.index)
            return _scalar(amps[l] if l <= band else 0.0, p)

        def evaluate(pts):
            return _cosine_series(np.atleast_2d(pts)[:, 0], amps)
    else:
        # clipped function is no longer band-limited; its coefficients come
        # from the fine grid, which is also used for evaluation
        pos = np.clip(vals, 0, None)
        z = pos.mean()
        table = pos / z
        spectrum = np.fft.fft(table) / fine_grid

        def coef(p):
            l = p.index
            if abs(l) >= fine_grid // 2:
                return _scalar(0.0, p)
            return _scalar(spectrum[l % fine_grid], p)

        def evaluate(pts):
            xs = np.atleast_2d(pts)[:, 0]
            return np.interp(xs, np.append(x, 1.0), np.append(table, table[0]))
    sup = float(amps[0] + 2 * amps[1:].sum())
    return DeformationDensity(
        "poly_decay", TORUS1, evaluate, sup, coef,
        params={"nu": nu, "band": band, "clipped": clipped},
    )


def heat_density(group: GroupSpec = TORUS1, t=None) -> DeformationDensity:
    """Heat kernel at time ``t``: ``c_pi = exp(-t lambda_pi) Id``.

    Default ``t`` is 0.1 on tori and 0.25 on SO(3), where small times make
    rejection sampling expensive.
    """
    t = float(t if t is not None else (0.1 if group.is_torus else 0.25))
    if t <= 0:
        raise ValueError("heat kernel needs t > 0")
    coef = lambda p: _scalar(math.exp(-t * p.lambda_pi), p)
    if group.is_torus:
        def circle(x):
            if t < 1:
                K = int(math.ceil(math.sqrt(40 * t) / math.pi)) + 1
                k = np.arange(-K, K + 2)
                d = x[:, None] - k[None, :]
                return math.sqrt(math.pi / t) * np.exp(-(math.pi ** 2) * d * d / t).sum(axis=1)
            L = int(math.sqrt(40 / t)) + 1
            amps = np.exp(-t * np.arange(L + 1) ** 2.0)
            return _cosine_series(x, amps)

        sup1 = float(circle(np.zeros(1))[0])
        sigma = math.sqrt(t / (2 * math.pi ** 2))
        k = group.ncoords

        def evaluate(pts):
            pts = np.atleast_2d(pts)
            out = circle(pts[:, 0])
            for j in range(1, k):
                out = out * circle(pts[:, j])
            return out

        def sampler(rng, size):
            return np.mod(rng.normal(0.0, sigma, (size, k)), 1.0)

        return DeformationDensity("heat", group, evaluate, sup1 ** k, coef, {"t": t}, sampler)

    lmax = 0
    while (2 * lmax + 1) ** 2 * math.exp(-t * lmax * (lmax + 1)) > 1e-17:
        lmax += 1
    ls = np.arange(lmax + 1)
    wts = (2 * ls + 1) * np.exp(-t * ls * (ls + 1.0))

    def so3_heat(theta):
        # character chi_l(theta) = 1 + 2 sum_{j<=l} cos(j theta)
        cosj = np.cos(np.outer(theta, ls))
        chi = 2 * np.cumsum(cosj, axis=1) - 1
        return chi @ wts

    sup = float(so3_heat(np.zeros(1))[0])
    return DeformationDensity(
        "heat", SO3, lambda pts: so3_heat(rotation_angle(np.atleast_2d(pts))), sup, coef, {"t": t})


def bump_density(k=4) -> DeformationDensity:
    """SO(3) bump ``cos^(2k)(theta/2) / Z`` concentrated at the identity.

    Coefficients are ``c_l Id`` with ``c_l = <h, chi_l> / (2l+1)``, computed by
    a uniform rule that is exact for the cosine polynomials involved.
    """
    k = int(k)
    if k < 0:
        raise ValueError("bump order k must be >= 0")

    def haar_angle_mean(values_fn, degree):
        # mean over Haar of a class function that is a cosine polynomial of
        # the given degree in theta; Haar angle density is (1 - cos theta)/pi
        n = 2 * (degree + 2)
        th = 2 * np.pi * np.arange(n) / n
        return float(np.mean(values_fn(th) * (1 - np.cos(th))))

    base = lambda th: ((1 + np.cos(th)) / 2) ** k
    Z = haar_angle_mean(base, k + 1)
    cl = []
    for l in range(k + 1):
        chi = lambda th, l=l: 2 * np.cos(np.outer(th, np.arange(l + 1))).sum(axis=1) - 1
        cl.append(haar_angle_mean(lambda th: base(th) * chi(th), k + l + 1) / Z / (2 * l + 1))

    def coef(p):
        return _scalar(cl[p.index] if p.index <= k else 0.0, p)

    def evaluate(pts):
        w = np.atleast_2d(pts)[:, 0]
        return w ** (2 * k) / Z

    return DeformationDensity("bump", SO3, evaluate, 1.0 / Z, coef, {"k": k})


def product_density(h1: DeformationDensity, h2: DeformationDensity) -> DeformationDensity:
    """Density ``h1(x) h2(y)`` on T^2 from two circle densities."""
    if h1.group != TORUS1 or h2.group != TORUS1:
        raise ValueError("product_density combines two Torus1 densities")

    def evaluate(pts):
        pts = np.atleast_2d(pts)
        return h1.density_eval(pts[:, :1]) * h2.density_eval(pts[:, 1:2])

    def coef(p):
        a, b = p.index
        return h1.coefficient_fn(make_irrep(TORUS1, a)) * h2.coefficient_fn(make_irrep(TORUS1, b))

    # independent coordinates, so each factor is sampled on its own
    sampler = lambda rng, size: np.concatenate(
        [sample_deformations(h1, rng, size), sample_deformations(h2, rng, size)], axis=1)
    return DeformationDensity(
        f"product({h1.name},{h2.name})", TORUS2, evaluate, h1.density_sup * h2.density_sup, coef,
        {"first": h1.describe(), "second": h2.describe()}, sampler)


def _torus_family(factory):
    name = factory.__name__.removesuffix("_density")

    def build(group, **kw):
        if group == TORUS1:
            return factory(**kw)
        h = product_density(factory(**kw), factory(**kw))
        return DeformationDensity(name, h.group, h.density_eval, h.density_sup,
                                  h.coefficient_fn, dict(kw), h.sampler)

    return build


_FACTORIES = {
    "uniform": lambda group, **kw: uniform_density(group),
    "cosine": _torus_family(cosine_density),
    "poly_decay": _torus_family(poly_decay_density),
    "heat": lambda group, **kw: heat_density(group, **kw),
    "bump": lambda group, **kw: bump_density(**kw),
}

DENSITY_NAMES = tuple(_FACTORIES)


def make_density(name: str, group="Torus1", **params) -> DeformationDensity:
    """Build a catalog density by name.

    On Torus2, ``cosine`` and ``poly_decay`` are products of the circle versions.
    """
    group = get_group(group)
    if name not in _FACTORIES:
        raise ValueError(f"unknown density {name!r}; choose from {', '.join(DENSITY_NAMES)}")
    if name == "bump" and group != SO3:
        raise ValueError("bump density lives on SO3")
    if name in ("cosine", "poly_decay") and group == SO3:
        raise ValueError(f"{name} density is defined on tori only")
    return _FACTORIES[name](group, **params)


def parse_density_spec(spec: str):
    """``"poly_decay:nu=1,band=64"`` -> ("poly_decay", {"nu": 1.0, "band": 64})."""
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"bad density parameter {item!r}")
        try:
            num = float(val)
            params[key.strip()] = int(num) if num.is_integer() and "." not in val else num
        except ValueError:
            params[key.strip()] = val
    return name.strip(), params


# ---------------------------------------------------------------------------
# sampling

def sample_deformations(h: DeformationDensity, rng, size: int):
    """``size`` i.i.d. draws from h as a raw point array.

    Uses the density's direct sampler when it has one; otherwise rejection
    sampling with Haar proposals, accepting g with probability h(g)/sup.
    The proposal batch size depends only on (size, sup), so the stream of
    random numbers consumed is deterministic.

    Raises
    ------
    SamplerError
        If fewer than 1e-4 of the proposals in a window are accepted.
    """
    if h.sampler is not None:
        return np.asarray(h.sampler(rng, size), dtype=float).reshape(size, h.group.ncoords)
    sup = float(h.density_sup)
    if not np.isfinite(sup) or sup < 1:
        raise SamplerError(f"density_sup must be finite and >= 1, got {sup}")
    batch = min(_MAX_BATCH, max(64, int(math.ceil(size * sup * 1.25)) + 16))
    chunks = []
    got = proposed = accepted_window = proposed_window = 0
    while got < size:
        g = haar_sample_array(h.group, rng, batch)
        u = rng.random(batch)
        keep = u * sup < h.density_eval(g)
        acc = g[keep]
        chunks.append(acc)
        got += acc.shape[0]
        proposed += batch
        accepted_window += acc.shape[0]
        proposed_window += batch
        if proposed_window >= ACCEPTANCE_WINDOW:
            if accepted_window / proposed_window < ACCEPTANCE_FLOOR:
                raise SamplerError(
                    f"rejection acceptance {accepted_window / proposed_window:.2e} below "
                    f"{ACCEPTANCE_FLOOR:g} for density {h.name!r}; supply a direct sampler")
            accepted_window = proposed_window = 0
    return np.concatenate(chunks, axis=0)[:size]


def sample_deformation(h: DeformationDensity, rng) -> GroupElement:
    """One draw tau ~ h."""
    return GroupElement.from_array(h.group, sample_deformations(h, rng, 1)[0])
