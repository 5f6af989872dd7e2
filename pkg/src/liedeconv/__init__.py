"""
Deconvolution of randomly deformed signals on compact Lie groups.

Supported groups are the circle T^1, the torus T^2 and the rotation group
SO(3).  The package covers group elements and irreducible representations,
Fourier analysis on quadrature grids, Fourier-domain simulation of the
deformable white-noise model, the spectral-cutoff deconvolution estimator
with Monte-Carlo risk evaluation, and a small experiment harness.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    GridResolutionError,
    GroupMismatchError,
    IllConditionedError,
    LieDeconvError,
    SamplerError,
)
from .groups import (
    SO3,
    TORUS1,
    TORUS2,
    GroupElement,
    GroupSpec,
    IrrepDescriptor,
    enumerate_irreps,
    get_group,
    group_op,
    haar_sample,
    identity,
    inverse,
    irrep_matrix,
    make_irrep,
    spectral_count,
)
from .harmonic import (
    FourierCoefficients,
    GridFunction,
    QuadratureGrid,
    analyze,
    convolve,
    grid_for_cutoff,
    l2_norm_sq,
    make_grid,
    smoothness_profile,
    sobolev_norm_sq,
    synthesize,
)
from .densities import DeformationDensity, make_density, sample_deformation, sample_deformations
from .simulate import ObservationSet, sample_matrix_noise, simulate_dataset
from .estimator import (
    EstimatorConfig,
    RiskEstimate,
    assouad_family,
    assouad_kappa,
    bandwidth_T,
    deconvolve_estimate,
    make_truth,
    mc_risk,
    risk_of,
)
from .experiment import ExperimentConfig, RiskTable, fit_loglog_slope, run_rate_sweep

__all__ = [
    "ConfigError",
    "GridResolutionError",
    "GroupMismatchError",
    "IllConditionedError",
    "LieDeconvError",
    "SamplerError",
    "SO3",
    "TORUS1",
    "TORUS2",
    "GroupElement",
    "GroupSpec",
    "IrrepDescriptor",
    "enumerate_irreps",
    "get_group",
    "group_op",
    "haar_sample",
    "identity",
    "inverse",
    "irrep_matrix",
    "make_irrep",
    "spectral_count",
    "FourierCoefficients",
    "GridFunction",
    "QuadratureGrid",
    "analyze",
    "convolve",
    "grid_for_cutoff",
    "l2_norm_sq",
    "make_grid",
    "smoothness_profile",
    "sobolev_norm_sq",
    "synthesize",
    "DeformationDensity",
    "make_density",
    "sample_deformation",
    "sample_deformations",
    "ObservationSet",
    "sample_matrix_noise",
    "simulate_dataset",
    "EstimatorConfig",
    "RiskEstimate",
    "assouad_family",
    "assouad_kappa",
    "bandwidth_T",
    "deconvolve_estimate",
    "make_truth",
    "mc_risk",
    "risk_of",
    "ExperimentConfig",
    "RiskTable",
    "fit_loglog_slope",
    "run_rate_sweep",
]
