import math

import mpmath
import numpy as np
import pytest

from liedeconv.densities import make_density
from liedeconv.errors import ConfigError, GroupMismatchError, IllConditionedError
from liedeconv.estimator import (
    EstimatorConfig,
    RiskEstimate,
    annulus,
    assouad_family,
    assouad_kappa,
    bandwidth_T,
    deconvolve_estimate,
    exact_noise_risk,
    make_truth,
    mc_risk,
    poly_truth,
    replicate_estimates,
    risk_of,
    single_frequency_truth,
    tail_term,
    zero_truth,
)
from liedeconv.groups import SO3, TORUS1, TORUS2
from liedeconv.harmonic import (
    FourierCoefficients,
    grid_for_cutoff,
    l2_norm_sq,
    sobolev_norm_sq,
    synthesize_points,
)
from liedeconv.simulate import simulate_dataset

from conftest import random_coeffs


def mp_floor_power(n, s, nu, dim):
    """floor(n^(2/(2s+2nu+dim))) at 60 digits; values within 1e-40 of an integer are that integer."""
    with mpmath.workdps(60):
        x = mpmath.power(n, mpmath.mpf(2) / (2 * mpmath.mpf(s) + 2 * mpmath.mpf(nu) + dim))
        k = mpmath.nint(x)
        return int(k) if abs(x - k) < mpmath.mpf(10) ** -40 else int(mpmath.floor(x))


def test_bandwidth_examples():
    assert bandwidth_T(1, 3, 1, 1) == 1
    assert mp_floor_power(1024, 3, 1, 1) == 4
    assert bandwidth_T(1024, 3, 1, 1) == 4
    assert mp_floor_power(10 ** 6, 2, 0, 1) == 251
    assert bandwidth_T(10 ** 6, 2, 0, 1) == 251


def test_bandwidth_exact_powers():
    # n = k^(2s+2nu+dim)/2 lands exactly on an integer
    assert bandwidth_T(8 ** 4, 3, 0.5, 1) == 8.0  # exponent 2/8
    assert bandwidth_T(7 ** 3, 2, 0, 2) == 7.0  # exponent 2/6
    assert bandwidth_T(7 ** 3 - 1, 2, 0, 2) == 6.0


@pytest.mark.parametrize("n", [2, 17, 128, 999, 4096, 10 ** 5, 123457])
@pytest.mark.parametrize("s,nu,dim", [(3, 1, 1), (2, 0, 1), (2.5, 0.5, 3), (1.5, 2, 2)])
def test_bandwidth_against_mpmath(n, s, nu, dim):
    assert bandwidth_T(n, s, nu, dim) == mp_floor_power(n, s, nu, dim)


def test_estimator_config_validation():
    with pytest.raises(ConfigError):
        EstimatorConfig(1.0, 1).validate(SO3)
    with pytest.raises(ConfigError):
        EstimatorConfig(2, -1).validate(TORUS1)
    with pytest.raises(ConfigError):
        EstimatorConfig(2, 1, A=0).validate(TORUS1)
    assert EstimatorConfig(2, 1, cutoff_override=5).cutoff(10 ** 6, 1) == 5


def test_zero_observations_give_zero_estimate():
    h = make_density("poly_decay", "Torus1", nu=1)
    obs = simulate_dataset(FourierCoefficients.zeros(TORUS1, 10), h, 20, 0.0, 1)
    est = deconvolve_estimate(obs, h, 10)
    assert all(np.all(b == 0) for b in est.blocks)


@pytest.mark.parametrize("group,name,params,cutoff", [
    (TORUS1, "poly_decay", {"nu": 1}, 10.0),
    (SO3, "bump", {"k": 4}, 13.0),
])
def test_single_identity_observation(group, name, params, cutoff, rng):
    h = make_density(name, group, **params)
    truth = random_coeffs(group, cutoff, rng)
    e = np.zeros((1, group.ncoords))
    if group is SO3:
        e[0, 0] = 1.0
    obs = simulate_dataset(truth, h, 1, 0.0, 0, deformations=e)
    est = deconvolve_estimate(obs, h, cutoff)
    hc = h.coefficients(cutoff)
    for p, b in est.items():
        assert np.allclose(b, truth[p.index] @ np.linalg.inv(hc[p.index]), atol=1e-10)


def test_estimate_drops_irreps_beyond_cutoff():
    h = make_density("heat", "Torus1", t=0.1)
    obs = simulate_dataset(FourierCoefficients.trivial(TORUS1, 26), h, 5, 1.0, 2)
    est = deconvolve_estimate(obs, h, 10)
    assert est.cutoff == 10 and len(est) == 7


def test_ill_conditioned_kernel_refused():
    h = make_density("cosine", "Torus1", a=0.5)
    obs = simulate_dataset(FourierCoefficients.trivial(TORUS1, 5), h, 5, 1.0, 2)
    with pytest.raises(IllConditionedError) as err:
        deconvolve_estimate(obs, h, 5)
    assert err.value.irrep == -2 and err.value.condition == math.inf
    with pytest.raises(IllConditionedError):
        replicate_estimates(FourierCoefficients.trivial(TORUS1, 5), make_density("uniform", "Torus1"),
                            10, 1.0, 5, 2, 0)


def test_estimate_group_mismatch():
    obs = simulate_dataset(FourierCoefficients.trivial(TORUS1, 5), make_density("heat", "Torus1"), 3, 1.0, 0)
    with pytest.raises(GroupMismatchError):
        deconvolve_estimate(obs, make_density("heat", "SO3"), 5)


def test_risk_of_examples(rng):
    c = random_coeffs(SO3, 13, rng)
    assert risk_of(c, c) == 0
    truth = FourierCoefficients.zeros(TORUS1, 5).replace(1, [[1]]).replace(-1, [[1]])
    assert risk_of(FourierCoefficients.zeros(TORUS1, 2), truth) == 2
    with pytest.raises(GroupMismatchError):
        risk_of(c, FourierCoefficients.zeros(TORUS1, 5))


@pytest.mark.parametrize("group,cut_est,cut_truth", [(TORUS1, 10.0, 40.0), (SO3, 7.0, 21.0)])
def test_risk_of_matches_quadrature(group, cut_est, cut_truth, rng):
    est = random_coeffs(group, cut_est, rng)
    truth = random_coeffs(group, cut_truth, rng)
    grid = grid_for_cutoff(group, cut_truth)
    diff = synthesize_points(est, grid.points) - synthesize_points(truth, grid.points)
    quad = float(np.sum(grid.weights * np.abs(diff) ** 2))
    assert abs(risk_of(est, truth) - quad) < 1e-8 * max(1.0, quad)


def test_tail_term():
    truth = FourierCoefficients.from_function(TORUS1, 17, lambda p: [[1.0]])
    assert tail_term(truth, 5) == 9 - 5  # l^2 >= 5: +-3, +-4
    assert tail_term(truth, 1) == 8


def test_variance_oracle_documented_configuration():
    h = make_density("poly_decay", "Torus1", nu=1)
    assert math.isclose(exact_noise_risk(h.coefficients(5), 100, 1.0), 0.15, rel_tol=1e-12)
    cfg = EstimatorConfig(3, 1, 1, cutoff_override=5)
    r = mc_risk(zero_truth(TORUS1, 5), h, 100, 1.0, cfg, 400, 77)
    assert abs(r.mean_risk - 0.15) < 4 * r.std_error
    assert r.tail_term == 0


def test_variance_oracle_so3():
    h = make_density("bump", "SO3", k=4)
    cfg = EstimatorConfig(2, 1, 1, cutoff_override=7)
    expected = exact_noise_risk(h.coefficients(7), 50, 0.5)
    r = mc_risk(zero_truth(SO3, 7), h, 50, 0.5, cfg, 300, 5)
    assert abs(r.mean_risk - expected) < 4 * r.std_error


def test_risk_decomposition_identity():
    h = make_density("heat", "Torus1", t=0.05)
    truth = poly_truth(TORUS1, 3, 1.0, band=200)
    r = mc_risk(truth, h, 64, 0.5, EstimatorConfig(3, 0, 1), 20, 3)
    R = r.replicates
    assert math.isclose(r.bias_sq + r.variance_term * (R - 1) / R, r.mean_risk, rel_tol=1e-10)
    assert r.bias_contamination == pytest.approx(r.variance_term / R)
    assert r.mean_risk >= 0 and r.tail_term > 0
    assert set(RiskEstimate.to_dict(r)) >= {"mean_risk", "std_error", "replicates", "bias_sq",
                                            "variance_term", "tail_term", "config"}


def test_noiseless_large_n_leaves_tail_only():
    h = make_density("heat", "Torus1", t=0.02)
    truth = poly_truth(TORUS1, 3, 1.0, band=100)
    cfg = EstimatorConfig(3, 0, 1, cutoff_override=10)
    small = mc_risk(truth, h, 2_000, 0.0, cfg, 16, 1)
    large = mc_risk(truth, h, 20_000, 0.0, cfg, 16, 1)
    assert large.tail_term == small.tail_term
    excess = large.mean_risk - large.tail_term
    assert 0 <= excess < 0.02 * large.tail_term
    assert excess < 0.2 * (small.mean_risk - small.tail_term)


def test_mc_risk_thread_independent():
    h = make_density("poly_decay", "Torus1", nu=1)
    truth = poly_truth(TORUS1, 3, 1.0, band=100)
    cfg = EstimatorConfig(3, 1, 1)
    a = mc_risk(truth, h, 300, 0.5, cfg, 12, 42, threads=1)
    b = mc_risk(truth, h, 300, 0.5, cfg, 12, 42, threads=4)
    assert a.to_dict() == b.to_dict()


def test_mc_risk_requires_two_replicates():
    with pytest.raises(ValueError):
        mc_risk(zero_truth(TORUS1, 2), make_density("heat", "Torus1"), 10, 1.0, EstimatorConfig(3, 0), 1, 0)


def test_unbiasedness_small():
    h = make_density("poly_decay", "Torus1", nu=1)
    truth = poly_truth(TORUS1, 3, 1.0, band=64)
    band, est = replicate_estimates(truth, h, 200, 0.5, 10, 400, 17)
    c = np.concatenate([b.ravel() for b in band.blocks])
    for part in (np.real, np.imag):
        x = part(est)
        se = x.std(axis=0, ddof=1) / np.sqrt(x.shape[0])
        assert np.all(np.abs(x.mean(axis=0) - part(c)) < 4 * se)


def test_assouad_enumeration_torus():
    kappa = assouad_kappa(TORUS1, 4, 3, 1.0)
    fam = assouad_family(TORUS1, 4, 3, kappa)
    assert [p.index for p in annulus(TORUS1, 4)] == [-2, 2]
    assert len(fam) == 4
    patterns = {tuple(int(m.signs[k][0, 0]) for k in (-2, 2)) for m in fam}
    assert patterns == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_assouad_so3_members():
    D = 2.0  # annulus l = 1 (lambda = 2), sum d^2 = 9
    kappa = assouad_kappa(SO3, D, 2.0, 1.0)
    fam = assouad_family(SO3, D, 2.0, kappa)
    assert len(fam) == 2 ** 9
    mu = fam[0].mu
    for m in fam:
        assert abs(l2_norm_sq(m.coeffs) - mu * 9) < 1e-10
        assert sobolev_norm_sq(m.coeffs, 2.0) <= 1.0 + 1e-12
        assert np.allclose(np.abs(m.w[1]), 1 / np.sqrt(3))


def test_assouad_random_draws_and_errors():
    fam = assouad_family(TORUS2, 16, 2.0, 0.1, np.random.default_rng(0), count=5)
    assert len(fam) == 5
    with pytest.raises(ValueError):
        assouad_family(TORUS2, 16, 2.0, 0.1)  # too many signs to enumerate
    with pytest.raises(ValueError):
        assouad_family(TORUS1, 2.0, 3.0, 0.1)  # no l^2 in [2, 4)


def test_truth_fixtures_sit_on_radius():
    for group in (TORUS1, TORUS2, SO3):
        t = poly_truth(group, 2.5, 2.0, band=30)
        assert sobolev_norm_sq(t, 2.5) == pytest.approx(4.0)
    t = single_frequency_truth(SO3, 2, 2.0, 1.0)
    assert sobolev_norm_sq(t, 2.0) == pytest.approx(1.0)
    assert make_truth("single", "Torus2", 2.0, index=[1, 2]).get((1, 2)) is not None
    with pytest.raises(ValueError):
        make_truth("wiggly", "Torus1", 2.0)
