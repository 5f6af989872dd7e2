"""
Fourier-domain simulation of the deformable white-noise model.

For each observation m and each irrep pi below the cutoff::

    c_pi(Y_m) = c_pi(f*) pi(tau_m^-1) + eps * W_m,pi

with tau_m ~ h and W entries i.i.d. circular complex Gaussian of variance 1/d_pi.

Random streams: observations are grouped in blocks of ``block_size``.  Block b
draws its deformations from the substream (b, 0) and its noise from (b, 1) of
the master seed, and always generates a full block.  Observation m therefore
sees the same random numbers whatever n is, and the noise for irrep pi does not
depend on how many irreps follow it in canonical order.
"""

from dataclasses import dataclass, field
import json
from typing import Optional

import numpy as np

from .densities import DeformationDensity, sample_deformations
from .errors import GroupMismatchError
from .groups import (
    GroupSpec,
    IrrepDescriptor,
    get_group,
    irrep_matrices,
    max_degree,
    so3_rep_all,
)
from .harmonic import FourierCoefficients

BLOCK_SIZE = 256


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, a SeedSequence or None (fresh entropy)."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        raise TypeError("pass an int seed or SeedSequence, not a Generator")
    return np.random.SeedSequence(seed)


def substream(seed, *keys) -> np.random.SeedSequence:
    """Child stream addressed by ``keys`` under ``seed``; independent of call order."""
    parent = as_seed_sequence(seed)
    return np.random.SeedSequence(parent.entropy, spawn_key=tuple(parent.spawn_key) + tuple(int(k) for k in keys))


def make_rng(seed, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(substream(seed, *keys)))


def sample_matrix_noise(irrep: IrrepDescriptor, rng, size=None):
    """Complex Gaussian d x d matrix; real and imaginary parts N(0, 1/(2d)) each.

    With ``size`` given, returns a stack of shape (size, d, d).
    """
    d = irrep.dim_pi
    shape = (d, d) if size is None else (size, d, d)
    scale = np.sqrt(0.5 / d)
    z = rng.standard_normal(shape + (2,))
    return scale * (z[..., 0] + 1j * z[..., 1])


def _rep_stack(group, irreps, points):
    """pi(g) for each irrep in order, each of shape (N, d, d)."""
    if group.is_torus:
        return [irrep_matrices(p, points) for p in irreps]
    allD = so3_rep_all(max_degree(irreps), points)
    return [allD[p.index] for p in irreps]


@dataclass
class ObservationSet:
    """n observations of every Fourier coefficient below ``cutoff``.

    ``blocks[i]`` holds c_pi(Y_m) for m = 0..n-1 and pi = ``irreps[i]``,
    stacked to shape (n, d, d).
    """

    group: GroupSpec
    cutoff: float
    irreps: list
    blocks: list
    epsilon: float
    seed: Optional[object] = None
    density_name: str = ""
    truth_name: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        n = {b.shape[0] for b in self.blocks}
        if len(n) > 1:
            raise ValueError("observation blocks disagree on n")
        if len(self.irreps) != len(self.blocks):
            raise ValueError("one block per irrep required")

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0] if self.blocks else 0

    def observation(self, m) -> FourierCoefficients:
        return FourierCoefficients(self.group, self.cutoff, [b[m] for b in self.blocks])

    def mean_coefficients(self) -> FourierCoefficients:
        return FourierCoefficients(self.group, self.cutoff, [b.mean(axis=0) for b in self.blocks])

    def header(self):
        seed = self.seed
        if isinstance(seed, np.random.SeedSequence):
            seed = {"entropy": seed.entropy, "spawn_key": list(seed.spawn_key)}
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "seed": seed,
            "density_name": self.density_name,
            "truth_name": self.truth_name,
        }

    def to_dict(self):
        return {
            "header": self.header(),
            "group": self.group.name,
            "cutoff": self.cutoff,
            "observations": [self.observation(m).to_dict()["entries"] for m in range(self.n)],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc):
        group = get_group(doc["group"])
        cutoff = float(doc["cutoff"])
        header = doc["header"]
        obs = [
            FourierCoefficients.from_dict({"group": group.name, "cutoff": cutoff, "entries": e})
            for e in doc["observations"]
        ]
        if not obs:
            raise ValueError("observation set is empty")
        irreps = obs[0].irreps
        blocks = [np.stack([o.blocks[i] for o in obs]) for i in range(len(irreps))]
        return cls(group, cutoff, irreps, blocks, float(header["epsilon"]), header.get("seed"),
                   header.get("density_name", ""), header.get("truth_name", ""))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def simulate_dataset(truth: FourierCoefficients, h: DeformationDensity, n: int, epsilon: float,
                     seed, *, block_size: int = BLOCK_SIZE, deformations=None,
                     truth_name: str = "") -> ObservationSet:
    """Draw n observations of the model at the truth's cutoff.

    Parameters
    ----------
    truth : FourierCoefficients
        Coefficients of f*; their cutoff sets the observed irreps.
    h : DeformationDensity
        Law of the deformations; must live on the truth's group.
    seed : int or SeedSequence
        Master stream for this dataset.
    deformations : array, optional
        Force tau_m (raw points, shape (n, ncoords)) instead of sampling them.
    """
    if truth.group != h.group:
        raise GroupMismatchError(f"truth on {truth.group}, density on {h.group}")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    epsilon = float(epsilon)
    if not epsilon >= 0:
        raise ValueError("epsilon must be >= 0")
    ss = as_seed_sequence(seed)
    group = truth.group
    irreps = truth.irreps
    nblocks = -(-n // block_size)
    parts = [[] for _ in irreps]
    for b in range(nblocks):
        if deformations is None:
            tau = sample_deformations(h, make_rng(ss, b, 0), block_size)
        else:
            tau = np.asarray(deformations, dtype=float)[b * block_size:(b + 1) * block_size]
            tau = tau.reshape(-1, group.ncoords)
        reps = _rep_stack(group, irreps, tau)
        noise_rng = make_rng(ss, b, 1)
        for i, (p, c, R) in enumerate(zip(irreps, truth.blocks, reps)):
            W = sample_matrix_noise(p, noise_rng, block_size)[: R.shape[0]]
            # c pi(tau^-1) = c pi(tau)^H
            parts[i].append(np.matmul(c, np.conj(np.swapaxes(R, -1, -2))) + epsilon * W)
    blocks = [np.concatenate(p, axis=0)[:n] for p in parts]
    if deformations is not None and blocks and blocks[0].shape[0] < n:
        raise ValueError("fewer forced deformations than observations")
    return ObservationSet(group, truth.cutoff, list(irreps), blocks, epsilon, ss,
                          h.name, truth_name, {"density_params": dict(h.params)})
