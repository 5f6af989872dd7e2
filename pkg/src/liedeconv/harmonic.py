"""
Matrix-valued Fourier analysis on the supported groups.

A function on G is represented either by samples on a quadrature grid
(:class:`GridFunction`) or by its Fourier coefficients
(:class:`FourierCoefficients`), the matrices

    c_pi(f) = int_G f(g) pi(g^{-1}) dg

for every irrep with eigenvalue below a cutoff.  Synthesis is the Peter-Weyl
sum ``f(g) = sum_pi d_pi Tr(pi(g) c_pi(f))``.

Grid rule: T^1/T^2 with maximal frequency L use N >= 2L+2 equispaced points
per coordinate; SO(3) with maximal degree L uses L+1 Gauss-Legendre nodes in
cos(beta) and 2L+1 uniform nodes in each of alpha, gamma.  Both are exact for
the band-limited integrands that appear in analysis and Parseval sums.
"""

from dataclasses import dataclass, field
import json
import warnings

import numpy as np

from .errors import GridResolutionError, GroupMismatchError, IllConditionedError
from .groups import (
    GroupKind,
    GroupSpec,
    GroupElement,
    enumerate_irreps,
    euler_zyz_to_quaternion,
    get_group,
    irrep_matrices,
    make_irrep,
    max_degree,
    quaternion_to_euler_zyz,
)
from .wigner import wigner_d_all

CONDITION_LIMIT = 1e12


class FourierCoefficients:
    """Fourier coefficients of a function on G, complete below ``cutoff``.

    Every irrep with ``lambda_pi < cutoff`` is present (explicit zeros allowed),
    stored in canonical order.  Blocks are read-only arrays of shape (d, d).
    """

    def __init__(self, group: GroupSpec, cutoff: float, blocks):
        self.group = group
        self.cutoff = float(cutoff)
        self.irreps = tuple(enumerate_irreps(group, self.cutoff))
        blocks = list(blocks)
        if len(blocks) != len(self.irreps):
            raise ValueError(
                f"expected {len(self.irreps)} blocks for cutoff {cutoff} on {group}, got {len(blocks)}")
        frozen = []
        for p, b in zip(self.irreps, blocks):
            b = np.array(b, dtype=complex).reshape(p.dim_pi, p.dim_pi) if np.ndim(b) < 2 \
                else np.array(b, dtype=complex)
            if b.shape != (p.dim_pi, p.dim_pi):
                raise ValueError(f"block for {p.index} has shape {b.shape}, expected {(p.dim_pi, p.dim_pi)}")
            b.setflags(write=False)
            frozen.append(b)
        self.blocks = tuple(frozen)
        self._pos = {p.index: i for i, p in enumerate(self.irreps)}

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, group, cutoff):
        irreps = enumerate_irreps(group, cutoff)
        return cls(group, cutoff, [np.zeros((p.dim_pi, p.dim_pi)) for p in irreps])

    @classmethod
    def from_function(cls, group, cutoff, func):
        """Blocks from ``func(irrep) -> matrix``."""
        irreps = enumerate_irreps(group, cutoff)
        return cls(group, cutoff, [func(p) for p in irreps])

    @classmethod
    def trivial(cls, group, cutoff, value=1.0):
        """Only the trivial coefficient set (``value``); e.g. the uniform density."""
        return cls.from_function(
            group, cutoff, lambda p: np.full((1, 1), value) if p.is_trivial else np.zeros((p.dim_pi, p.dim_pi)))

    # -- access -------------------------------------------------------------
    def __len__(self):
        return len(self.irreps)

    def __iter__(self):
        return iter(zip(self.irreps, self.blocks))

    def items(self):
        return zip(self.irreps, self.blocks)

    def __contains__(self, index):
        return _label(index) in self._pos

    def __getitem__(self, index):
        return self.blocks[self._pos[_label(index)]]

    def get(self, index, default=None):
        i = self._pos.get(_label(index))
        return default if i is None else self.blocks[i]

    def replace(self, index, block):
        """Copy with one block swapped."""
        blocks = list(self.blocks)
        blocks[self._pos[_label(index)]] = block
        return FourierCoefficients(self.group, self.cutoff, blocks)

    def truncate(self, cutoff):
        """Restrict to irreps with ``lambda_pi < cutoff`` (cutoff may not exceed ours)."""
        if cutoff > self.cutoff:
            raise ValueError(f"cannot extend coefficients from cutoff {self.cutoff} to {cutoff}")
        n = len(enumerate_irreps(self.group, cutoff))
        return FourierCoefficients(self.group, cutoff, self.blocks[:n])

    def extend(self, cutoff):
        """Zero-pad up to a larger cutoff."""
        if cutoff < self.cutoff:
            return self.truncate(cutoff)
        irreps = enumerate_irreps(self.group, cutoff)
        blocks = list(self.blocks) + [np.zeros((p.dim_pi, p.dim_pi)) for p in irreps[len(self.blocks):]]
        return FourierCoefficients(self.group, cutoff, blocks)

    def map(self, func):
        return FourierCoefficients(self.group, self.cutoff, [func(b) for b in self.blocks])

    def _binary(self, other, op):
        _check_group(self.group, other.group)
        cutoff = max(self.cutoff, other.cutoff)
        a, b = self.extend(cutoff), other.extend(cutoff)
        return FourierCoefficients(self.group, cutoff, [op(x, y) for x, y in zip(a.blocks, b.blocks)])

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return self.map(lambda b: b * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(np.negative)

    def allclose(self, other, atol=1e-12):
        if self.group != other.group or len(self) != len(other):
            return False
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def max_abs_diff(self, other):
        _check_group(self.group, other.group)
        cutoff = max(self.cutoff, other.cutoff)
        a, b = self.extend(cutoff), other.extend(cutoff)
        return max((float(np.abs(x - y).max()) for x, y in zip(a.blocks, b.blocks)), default=0.0)

    def __repr__(self):
        return f"FourierCoefficients({self.group}, cutoff={self.cutoff}, irreps={len(self)})"

    # -- serialization ------------------------------------------------------
    def to_dict(self):
        entries = []
        for p, b in self.items():
            entries.append({
                "index": list(p.index) if isinstance(p.index, tuple) else p.index,
                "dim": p.dim_pi,
                "lambda": p.lambda_pi,
                "matrix_real": b.real.tolist(),
                "matrix_imag": b.imag.tolist(),
            })
        return {"group": self.group.name, "cutoff": self.cutoff, "entries": entries}

    @classmethod
    def from_dict(cls, doc):
        group = get_group(doc["group"])
        cutoff = float(doc["cutoff"])
        by_label = {}
        for e in doc["entries"]:
            p = make_irrep(group, tuple(e["index"]) if isinstance(e["index"], list) else e["index"])
            if p.dim_pi != e["dim"]:
                raise ValueError(f"entry {e['index']}: dim {e['dim']} != {p.dim_pi}")
            by_label[p.index] = np.array(e["matrix_real"], dtype=float) + 1j * np.array(e["matrix_imag"], dtype=float)
        irreps = enumerate_irreps(group, cutoff)
        missing = [p.index for p in irreps if p.index not in by_label]
        if missing:
            raise ValueError(f"coefficient document is missing irreps {missing[:5]}")
        if len(by_label) != len(irreps):
            raise ValueError("coefficient document has entries at or above its cutoff")
        return cls(group, cutoff, [by_label[p.index] for p in irreps])

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _label(index):
    return tuple(index) if isinstance(index, (list, np.ndarray)) else index


def _check_group(a, b):
    if a != b:
        raise GroupMismatchError(f"group mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# quadrature grids

@dataclass(frozen=True)
class QuadratureGrid:
    """Product quadrature on G.

    ``points`` is (N, ncoords), ``weights`` sums to one (normalized Haar).
    ``shape`` is (N,) for T^1, (N, N) for T^2 and (N_alpha, N_beta, N_gamma)
    for SO(3); samples are laid out in C order over ``shape``.
    """

    group: GroupSpec
    shape: tuple
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    axes: tuple = field(repr=False)

    @property
    def band(self) -> int:
        """Largest degree L this grid analyzes exactly."""
        if self.group.is_torus:
            return (self.shape[0] - 2) // 2
        na, nb, ng = self.shape
        return min(nb - 1, (na - 1) // 2, (ng - 1) // 2)

    @property
    def size(self):
        return int(np.prod(self.shape))


def make_grid(group: GroupSpec, band: int) -> QuadratureGrid:
    """Smallest grid that is exact for functions of degree <= ``band``."""
    L = int(band)
    if L < 0:
        raise ValueError("band must be >= 0")
    if group.kind is GroupKind.TORUS1:
        n = 2 * L + 2
        x = np.arange(n) / n
        return QuadratureGrid(group, (n,), x[:, None], np.full(n, 1.0 / n), (x,))
    if group.kind is GroupKind.TORUS2:
        n = 2 * L + 2
        x = np.arange(n) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        return QuadratureGrid(group, (n, n), pts, np.full(n * n, 1.0 / (n * n)), (x, x))
    na = ng = 2 * L + 1
    nb = L + 1
    alpha = 2 * np.pi * np.arange(na) / na
    gamma = 2 * np.pi * np.arange(ng) / ng
    xb, wb = np.polynomial.legendre.leggauss(nb)
    beta = np.arccos(xb)
    A, B, C = np.meshgrid(alpha, beta, gamma, indexing="ij")
    pts = euler_zyz_to_quaternion(A.ravel(), B.ravel(), C.ravel())
    w = (np.full(na, 1.0 / na)[:, None, None] * (wb / 2)[None, :, None] * np.full(ng, 1.0 / ng)[None, None, :])
    return QuadratureGrid(group, (na, nb, ng), pts, w.ravel(), (alpha, beta, gamma, wb / 2))


def grid_for_cutoff(group: GroupSpec, lambda_cutoff: float) -> QuadratureGrid:
    return make_grid(group, max_degree(enumerate_irreps(group, lambda_cutoff)))


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on a quadrature grid."""

    grid: QuadratureGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)
        object.__setattr__(self, "values", v)

    @property
    def group(self):
        return self.grid.group

    @classmethod
    def from_callable(cls, grid, func):
        """Sample ``func(points) -> values`` on ``grid``."""
        return cls(grid, np.asarray(func(grid.points)).reshape(grid.shape))

    def integral(self):
        return complex(np.sum(self.grid.weights * self.values.ravel()))

    def norm_sq(self):
        """Quadrature of |f|^2."""
        return float(np.sum(self.grid.weights * np.abs(self.values.ravel()) ** 2))


# ---------------------------------------------------------------------------
# analysis / synthesis

def analyze(f: GridFunction, lambda_cutoff: float) -> FourierCoefficients:
    """Fourier coefficients of grid samples for every irrep below ``lambda_cutoff``.

    Raises
    ------
    GridResolutionError
        If the grid is too coarse for the requested cutoff.
    """
    group = f.group
    irreps = enumerate_irreps(group, lambda_cutoff)
    L = max_degree(irreps)
    if L > f.grid.band:
        need = make_grid(group, L)
        raise GridResolutionError(
            f"grid {f.grid.shape} resolves degree <= {f.grid.band}; cutoff {lambda_cutoff} "
            f"needs degree {L}, minimum grid shape {need.shape}")
    if not irreps:
        return FourierCoefficients(group, lambda_cutoff, [])
    if group.kind is GroupKind.TORUS1:
        (x,) = f.grid.axes
        ls = np.array([p.index for p in irreps])
        E = np.exp(-2j * np.pi * np.outer(x, ls))
        c = (f.values @ E) / x.size
        return FourierCoefficients(group, lambda_cutoff, [v.reshape(1, 1) for v in c])
    if group.kind is GroupKind.TORUS2:
        x, y = f.grid.axes
        freqs = np.arange(-L, L + 1)
        Ex = np.exp(-2j * np.pi * np.outer(freqs, x))
        Ey = np.exp(-2j * np.pi * np.outer(freqs, y))
        F = Ex @ f.values @ Ey.T / f.grid.size
        return FourierCoefficients(group, lambda_cutoff,
                                   [F[p.index[0] + L, p.index[1] + L].reshape(1, 1) for p in irreps])
    return FourierCoefficients(group, lambda_cutoff, _so3_analyze(f, L))


def _so3_analyze(f, L):
    alpha, beta, gamma, wb = f.grid.axes
    m = np.arange(-L, L + 1)
    # F[b, m', m] = mean_{a,c} f[a,b,c] exp(i m' alpha_a) exp(i m gamma_c)
    Ea = np.exp(1j * np.outer(alpha, m)) / alpha.size
    Eg = np.exp(1j * np.outer(gamma, m)) / gamma.size
    F = np.einsum("abc,ap,cq->bpq", f.values, Ea, Eg)
    ds = wigner_d_all(L, beta)
    blocks = []
    for l in range(L + 1):
        sl = slice(L - l, L + l + 1)
        # c_{m m'} = sum_b w_b F[b, m', m] d_{m' m}(beta_b)
        acc = np.einsum("b,bpq->pq", wb, F[:, sl, sl] * ds[l])
        blocks.append(acc.T)
    return blocks


def synthesize_points(c: FourierCoefficients, points):
    """``sum_pi d_pi Tr(pi(g) c_pi)`` at a batch of raw points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(points.shape[0], dtype=complex)
    if len(c) == 0:
        return out
    if c.group.kind is GroupKind.SO3:
        L = max_degree(c.irreps)
        alpha, beta, gamma = quaternion_to_euler_zyz(points)
        ds = wigner_d_all(L, beta)
        for p, blk in c.items():
            l = p.index
            m = np.arange(-l, l + 1)
            ea = np.exp(-1j * np.outer(alpha, m))
            eg = np.exp(-1j * np.outer(gamma, m))
            # Tr(D c) = sum_{m,m'} D_{m m'} c_{m' m}
            out += p.dim_pi * np.einsum("nm,nmk,nk,km->n", ea, ds[l], eg, blk)
        return out
    for p, blk in c.items():
        out += irrep_matrices(p, points)[:, 0, 0] * blk[0, 0]
    return out


def synthesize(c: FourierCoefficients, g: GroupElement) -> complex:
    """Value of the Peter-Weyl sum at a single element."""
    _check_group(c.group, g.group)
    return complex(synthesize_points(c, g.array[None, :])[0])


def synthesize_grid(c: FourierCoefficients, grid: QuadratureGrid) -> GridFunction:
    """Batch synthesis onto a quadrature grid."""
    _check_group(c.group, grid.group)
    if c.group.kind is not GroupKind.SO3 or len(c) == 0:
        return GridFunction(grid, synthesize_points(c, grid.points).reshape(grid.shape))
    alpha, beta, gamma, _ = grid.axes
    L = max_degree(c.irreps)
    m = np.arange(-L, L + 1)
    ds = wigner_d_all(L, beta)
    G = np.zeros((beta.size, 2 * L + 1, 2 * L + 1), dtype=complex)
    for p, blk in c.items():
        l = p.index
        sl = slice(L - l, L + l + 1)
        G[:, sl, sl] += p.dim_pi * ds[l] * blk.T[None, :, :]
    Ea = np.exp(-1j * np.outer(alpha, m))
    Eg = np.exp(-1j * np.outer(gamma, m))
    vals = np.einsum("am,bmk,ck->abc", Ea, G, Eg)
    return GridFunction(grid, vals)


# ---------------------------------------------------------------------------
# norms, convolution

def l2_norm_sq(c: FourierCoefficients) -> float:
    """Parseval: ``sum_pi d_pi ||c_pi||_F^2``."""
    return float(sum(p.dim_pi * np.sum(np.abs(b) ** 2) for p, b in c.items()))


def sobolev_norm_sq(c: FourierCoefficients, s: float) -> float:
    """``||f||^2 + sum_pi lambda_pi^s d_pi ||c_pi||_F^2``.

    Warns (does not refuse) when ``s <= dim(G)/2``, where the Sobolev space is
    not defined.
    """
    if s <= c.group.dim / 2:
        warnings.warn(f"Sobolev order s={s} <= dim(G)/2={c.group.dim / 2}", RuntimeWarning, stacklevel=2)
    total = l2_norm_sq(c)
    for p, b in c.items():
        if p.lambda_pi > 0:
            total += p.lambda_pi ** s * p.dim_pi * float(np.sum(np.abs(b) ** 2))
    return float(total)


def convolve(f: FourierCoefficients, h: FourierCoefficients) -> FourierCoefficients:
    """Coefficients of ``f * h``: blockwise ``c_pi(f) c_pi(h)``.

    With unequal cutoffs the smaller one is used.
    """
    _check_group(f.group, h.group)
    cutoff = min(f.cutoff, h.cutoff)
    a, b = f.truncate(cutoff), h.truncate(cutoff)
    return FourierCoefficients(f.group, cutoff, [x @ y for x, y in zip(a.blocks, b.blocks)])


def convolve_quadrature(f_func, h_func, group, g_points, grid):
    """Direct quadrature of ``(f*h)(g) = int f(g'^{-1} g) h(g') dg'``.

    ``f_func`` and ``h_func`` map raw point arrays to values.  Independent of
    any Fourier machinery; used to check the convolution theorem.
    """
    from .groups import compose_arrays, inverse_arrays

    gp = grid.points
    hv = h_func(gp)
    inv = inverse_arrays(group, gp)
    out = []
    for g in np.atleast_2d(g_points):
        shifted = compose_arrays(group, inv, np.broadcast_to(g, gp.shape))
        out.append(np.sum(grid.weights * f_func(shifted) * hv))
    return np.array(out)


# ---------------------------------------------------------------------------
# smoothness of a convolution kernel

@dataclass
class SmoothnessProfile:
    """Operator-norm profile of a kernel's coefficients.

    ``nu_hat`` is the least-squares slope of log ||c_pi^{-1}||_op^2 against
    log lambda_pi over nontrivial irreps (None with fewer than two distinct
    nontrivial eigenvalues).  ``supersmooth`` is raised when
    log ||c_pi^{-1}||_op^2 is better explained as linear in lambda (exponential
    decay of the kernel) than as linear in log lambda.
    """

    lambdas: list
    indices: list
    op_norm_sq: list
    inv_op_norm_sq: list
    nu_hat: float = None
    intercept: float = None
    supersmooth: bool = False
    rss_power: float = None
    rss_exponential: float = None

    def to_dict(self):
        return {
            "lambdas": list(self.lambdas),
            "indices": [list(i) if isinstance(i, tuple) else i for i in self.indices],
            "op_norm_sq": list(self.op_norm_sq),
            "inv_op_norm_sq": list(self.inv_op_norm_sq),
            "nu_hat": self.nu_hat,
            "supersmooth": self.supersmooth,
            "rss_power": self.rss_power,
            "rss_exponential": self.rss_exponential,
        }


def smoothness_profile(h: FourierCoefficients) -> SmoothnessProfile:
    """Profile ``||c_pi(h)||_op^2`` and ``||c_pi(h)^{-1}||_op^2`` and fit the order nu.

    Raises
    ------
    IllConditionedError
        For the first irrep whose block is singular or has condition number
        at least 1e12 (e.g. every nontrivial irrep of the uniform density).
    """
    lambdas, indices, ops, invs = [], [], [], []
    for p, b in h.items():
        sv = np.linalg.svd(b, compute_uv=False)
        smax, smin = float(sv[0]), float(sv[-1])
        cond = np.inf if smin * smin == 0 else smax / smin
        if not cond < CONDITION_LIMIT:
            raise IllConditionedError(
                f"coefficient of irrep {p.index} (lambda={p.lambda_pi}) is not invertible: condition {cond:.3g}",
                irrep=p.index, condition=cond)
        lambdas.append(p.lambda_pi)
        indices.append(p.index)
        ops.append(smax ** 2)
        invs.append(1.0 / smin ** 2)
    prof = SmoothnessProfile(lambdas, indices, ops, invs)
    lam = np.array(lambdas)
    y = np.log(np.array(invs)) if invs else np.array([])
    mask = lam > 0
    if np.unique(lam[mask]).size >= 2:
        x = np.log(lam[mask])
        ym = y[mask]
        coef, rss, *_ = np.polyfit(x, ym, 1, full=True)
        prof.nu_hat = float(coef[0])
        prof.intercept = float(coef[1])
        prof.rss_power = float(rss[0]) if rss.size else 0.0
        if np.unique(lam[mask]).size >= 3:
            ecoef, erss, *_ = np.polyfit(lam[mask], ym, 1, full=True)
            prof.rss_exponential = float(erss[0]) if erss.size else 0.0
            prof.supersmooth = bool(ecoef[0] > 0 and prof.rss_exponential < prof.rss_power)
    return prof
