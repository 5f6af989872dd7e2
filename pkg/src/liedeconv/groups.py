"""
Concrete compact groups: the circle T^1, the 2-torus T^2 and SO(3).

Elements are stored as torus coordinates in [0, 1) or as sign-canonical unit
quaternions (w, x, y, z).  Irreducible representations are

* T^1: ``pi_l(x) = exp(2 pi i l x)``, l in Z, eigenvalue ``l**2``;
* T^2: ``pi_(l1,l2)(x, y) = exp(2 pi i (l1 x + l2 y))``, eigenvalue ``l1**2 + l2**2``;
* SO(3): Wigner D-matrices of degree l >= 0, dimension 2l+1, eigenvalue ``l(l+1)``.

The torus eigenvalues use l**2 rather than (2 pi l)**2.  This only rescales the
spectral cutoff; every rate exponent is unchanged.

Batch routines work on raw coordinate arrays of shape ``(N, 1)``, ``(N, 2)`` or
``(N, 4)``; the :class:`GroupElement` wrappers are for single points.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .errors import GroupMismatchError
from .wigner import wigner_D_all


class GroupKind(enum.Enum):
    TORUS1 = "Torus1"
    TORUS2 = "Torus2"
    SO3 = "SO3"


_DIMS = {GroupKind.TORUS1: 1, GroupKind.TORUS2: 2, GroupKind.SO3: 3}
_NCOORDS = {GroupKind.TORUS1: 1, GroupKind.TORUS2: 2, GroupKind.SO3: 4}


@dataclass(frozen=True)
class GroupSpec:
    kind: GroupKind

    @property
    def dim(self) -> int:
        """Manifold dimension (1, 2 or 3)."""
        return _DIMS[self.kind]

    @property
    def ncoords(self) -> int:
        return _NCOORDS[self.kind]

    @property
    def is_torus(self) -> bool:
        return self.kind is not GroupKind.SO3

    @property
    def name(self) -> str:
        return self.kind.value

    def __str__(self):
        return self.kind.value


TORUS1 = GroupSpec(GroupKind.TORUS1)
TORUS2 = GroupSpec(GroupKind.TORUS2)
SO3 = GroupSpec(GroupKind.SO3)

_ALIASES = {
    "torus1": TORUS1, "t1": TORUS1, "circle": TORUS1,
    "torus2": TORUS2, "t2": TORUS2,
    "so3": SO3, "so(3)": SO3,
}


def get_group(name) -> GroupSpec:
    """Look up a group by name (``"Torus1"``, ``"T2"``, ``"SO3"``, ...)."""
    if isinstance(name, GroupSpec):
        return name
    try:
        return _ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown group {name!r}; expected one of Torus1, Torus2, SO3") from None


def _check_same(a: GroupSpec, b: GroupSpec):
    if a != b:
        raise GroupMismatchError(f"group mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# quaternion helpers

def canonicalize_quaternions(q):
    """Normalize and flip sign so the first nonzero component is positive."""
    q = np.array(q, dtype=float)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    nz = q != 0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)
    return np.where(lead < 0, -q, q)


def quaternion_multiply(a, b):
    """Hamilton product of quaternion arrays (w, x, y, z), broadcasting."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def quaternion_to_matrix(q):
    """3x3 rotation matrices (active rotation) from unit quaternions."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], axis=-2)


def quaternion_to_euler_zyz(q):
    """zyz Euler angles (alpha, beta, gamma) with R = Rz(alpha) Ry(beta) Rz(gamma).

    Uses half-angle sums so that the gimbal poles beta = 0, pi need no branch.
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    cb = np.hypot(w, z)
    sb = np.hypot(x, y)
    beta = 2 * np.arctan2(sb, cb)
    half_sum = np.arctan2(z, w)
    half_diff = np.arctan2(-x, y)
    return half_sum + half_diff, beta, half_sum - half_diff


def euler_zyz_to_quaternion(alpha, beta, gamma):
    alpha, beta, gamma = np.broadcast_arrays(alpha, beta, gamma)
    hs = (alpha + gamma) / 2
    hd = (alpha - gamma) / 2
    cb = np.cos(beta / 2)
    sb = np.sin(beta / 2)
    return np.stack([cb * np.cos(hs), -sb * np.sin(hd), sb * np.cos(hd), cb * np.sin(hs)], axis=-1)


def _wrap_unit(x):
    x = np.mod(x, 1.0)
    return np.where(x >= 1.0, 0.0, x)


# ---------------------------------------------------------------------------
# elements

@dataclass(frozen=True)
class GroupElement:
    """A single group element.

    ``coords`` holds torus coordinates in [0, 1) or a canonical unit quaternion.
    """

    group: GroupSpec
    coords: tuple

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        if c.size != self.group.ncoords:
            raise ValueError(f"{self.group} element needs {self.group.ncoords} coordinates, got {c.size}")
        if self.group.is_torus:
            c = _wrap_unit(c)
        else:
            norm = np.linalg.norm(c)
            if not np.isfinite(norm) or abs(norm - 1.0) > 1e-6:
                raise ValueError(f"quaternion norm {norm} is not 1")
            c = canonicalize_quaternions(c)
        object.__setattr__(self, "coords", tuple(float(v) for v in c))

    @property
    def array(self):
        return np.array(self.coords)

    @classmethod
    def from_array(cls, group, arr):
        return cls(group, tuple(np.asarray(arr, dtype=float).reshape(-1)))

    def rotation_matrix(self):
        if self.group.kind is not GroupKind.SO3:
            raise GroupMismatchError("rotation_matrix is only defined on SO3")
        return quaternion_to_matrix(self.array)


def identity(group: GroupSpec) -> GroupElement:
    if group.is_torus:
        return GroupElement(group, (0.0,) * group.ncoords)
    return GroupElement(group, (1.0, 0.0, 0.0, 0.0))


def compose_arrays(group, a, b):
    """Batch group law on raw coordinates: ``a . b``."""
    if group.is_torus:
        return _wrap_unit(np.asarray(a, dtype=float) + np.asarray(b, dtype=float))
    return canonicalize_quaternions(quaternion_multiply(a, b))


def inverse_arrays(group, a):
    a = np.asarray(a, dtype=float)
    if group.is_torus:
        return _wrap_unit(-a)
    conj = a * np.array([1.0, -1.0, -1.0, -1.0])
    return canonicalize_quaternions(conj)


def group_op(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group composition ``a . b``."""
    _check_same(a.group, b.group)
    return GroupElement.from_array(a.group, compose_arrays(a.group, a.array, b.array))


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement.from_array(a.group, inverse_arrays(a.group, a.array))


def haar_sample_array(group: GroupSpec, rng, size):
    """``size`` Haar-distributed points as a raw coordinate array."""
    if group.is_torus:
        return rng.random((size, group.ncoords))
    q = rng.standard_normal((size, 4))
    return canonicalize_quaternions(q)


def haar_sample(group: GroupSpec, rng) -> GroupElement:
    """One draw from the normalized Haar measure."""
    return GroupElement.from_array(group, haar_sample_array(group, rng, 1)[0])


def rotation_angle(q):
    """Rotation angle in [0, pi] of unit quaternions."""
    q = np.asarray(q, dtype=float)
    return 2 * np.arctan2(np.linalg.norm(q[..., 1:], axis=-1), np.abs(q[..., 0]))


# ---------------------------------------------------------------------------
# irreducible representations

@dataclass(frozen=True)
class IrrepDescriptor:
    """One irreducible representation.

    ``index`` is an int for T^1 and SO(3) and an (l1, l2) tuple for T^2.
    """

    kind: GroupKind
    index: object
    dim_pi: int
    lambda_pi: float

    @property
    def is_trivial(self) -> bool:
        return self.lambda_pi == 0

    @property
    def sort_key(self):
        idx = self.index if isinstance(self.index, tuple) else (self.index,)
        return (self.lambda_pi, idx)

    @property
    def degree(self) -> int:
        """Largest |frequency| carried by the irrep (l for T^1/SO(3), max |l_i| on T^2)."""
        if isinstance(self.index, tuple):
            return max(abs(i) for i in self.index)
        return abs(self.index)


def make_irrep(group: GroupSpec, index) -> IrrepDescriptor:
    """Build the descriptor for an irrep label."""
    kind = group.kind
    if kind is GroupKind.TORUS1:
        l = int(index)
        return IrrepDescriptor(kind, l, 1, float(l * l))
    if kind is GroupKind.TORUS2:
        l1, l2 = (int(i) for i in index)
        return IrrepDescriptor(kind, (l1, l2), 1, float(l1 * l1 + l2 * l2))
    l = int(index)
    if l < 0:
        raise ValueError("SO3 irreps are labelled by l >= 0")
    return IrrepDescriptor(kind, l, 2 * l + 1, float(l * (l + 1)))


def enumerate_irreps(group: GroupSpec, lambda_cutoff: float) -> list:
    """All irreps with ``lambda_pi < lambda_cutoff``, ascending lambda then index."""
    if lambda_cutoff < 0:
        raise ValueError("lambda_cutoff must be nonnegative")
    T = float(lambda_cutoff)
    if T <= 0:
        return []
    kind = group.kind
    out = []
    if kind is GroupKind.TORUS1:
        L = math.isqrt(math.ceil(T))
        out = [make_irrep(group, l) for l in range(-L, L + 1) if l * l < T]
    elif kind is GroupKind.TORUS2:
        L = math.isqrt(math.ceil(T))
        out = [make_irrep(group, (a, b)) for a in range(-L, L + 1)
               for b in range(-L, L + 1) if a * a + b * b < T]
    else:
        l = 0
        while l * (l + 1) < T:
            out.append(make_irrep(group, l))
            l += 1
    out.sort(key=lambda p: p.sort_key)
    return out


def max_degree(irreps) -> int:
    return max((p.degree for p in irreps), default=0)


def irrep_matrices(irrep: IrrepDescriptor, points):
    """pi(g) for a batch of raw points; shape ``(N, d, d)``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    kind = irrep.kind
    if kind is GroupKind.TORUS1:
        return np.exp(2j * np.pi * irrep.index * points[:, 0])[:, None, None]
    if kind is GroupKind.TORUS2:
        l1, l2 = irrep.index
        return np.exp(2j * np.pi * (l1 * points[:, 0] + l2 * points[:, 1]))[:, None, None]
    alpha, beta, gamma = quaternion_to_euler_zyz(points)
    return wigner_D_all(irrep.index, alpha, beta, gamma)[irrep.index]


def irrep_matrix(irrep: IrrepDescriptor, g: GroupElement):
    """The unitary matrix pi(g), shape (d_pi, d_pi)."""
    if irrep.kind is not g.group.kind:
        raise GroupMismatchError(f"irrep of {irrep.kind.value} applied to element of {g.group}")
    return irrep_matrices(irrep, g.array[None, :])[0]


def so3_rep_all(lmax, points):
    """Wigner D-matrices of degree 0..lmax at quaternion points, one recurrence pass."""
    alpha, beta, gamma = quaternion_to_euler_zyz(np.atleast_2d(points))
    return wigner_D_all(lmax, alpha, beta, gamma)


def spectral_count(group: GroupSpec, T: float):
    """``(|G_T|, sum of d_pi**2 over lambda_pi < T)`` by direct counting."""
    if T <= 0:
        raise ValueError("T must be positive")
    kind = group.kind
    if kind is GroupKind.TORUS1:
        L = math.isqrt(math.ceil(T))
        count = sum(1 for l in range(-L, L + 1) if l * l < T)
        return count, count
    if kind is GroupKind.TORUS2:
        L = math.isqrt(math.ceil(T))
        l = np.arange(-L, L + 1)
        count = int(np.count_nonzero(l[:, None] ** 2 + l[None, :] ** 2 < T))
        return count, count
    count = 0
    total = 0
    l = 0
    while l * (l + 1) < T:
        count += 1
        total += (2 * l + 1) ** 2
        l += 1
    return count, total
