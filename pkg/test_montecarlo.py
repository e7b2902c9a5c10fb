"""
Testes de Monte Carlo: estatística de Hoeffding, acoplamento size-bias de somas e D/Ψ
"""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

import config
from distribution_factory import build_distribution
from exceptions import InputValidationError
from experiment_report import (
    CERTIFIED,
    UNRESOLVED,
    VIOLATED,
    compare_band,
    compare_degenerate,
    dkw_epsilon,
    empirical_tail,
)
from hoeffding_simulator import (
    HoeffdingConfig,
    exact_mean,
    exact_variance,
    sample_permutations,
    simulate_hoeffding,
)
from size_bias_coupling import (
    EXACT,
    SAMPLING,
    SumCouplingConfig,
    estimate_D_psi,
    sum_size_bias_coupling,
    verify_coupling_bound,
)


def poisson(lam):
    return build_distribution({"family": "poisson", "params": {"lambda": lam}})


def point_mass(value):
    return build_distribution({"family": "point-mass", "params": {"value": value}})


def bernoulli(p):
    return build_distribution({"family": "bernoulli", "params": {"p": p}})


# ----------------------------------------------------------- DKW e bandas


def test_dkw_epsilon():
    assert dkw_epsilon(100_000) == pytest.approx(math.sqrt(math.log(200) / 200_000))
    assert dkw_epsilon(1000, 0.999) > dkw_epsilon(1000, 0.99)
    with pytest.raises(InputValidationError):
        dkw_epsilon(0)


def test_empirical_tail_counts_ties():
    samples = np.array([0.0, 1.0, 1.0, 2.0])
    np.testing.assert_allclose(empirical_tail(samples, np.array([0.0, 1.0, 1.5, 3.0])), [1.0, 0.75, 0.25, 0.0])


def test_band_statuses():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    tail = np.array([0.5, 0.2, 0.05, 0.0])
    bound = np.array([1.0, 0.21, 0.01, 0.001])
    check = compare_band("teste", t, tail, 0.02, bound)
    assert check.statuses == [CERTIFIED, UNRESOLVED, VIOLATED, UNRESOLVED]
    assert not check.passed
    assert check.violations == [2.0]


def test_band_passes_when_unresolved_points_are_below_resolution():
    t = np.array([0.0, 1.0])
    check = compare_band("teste", t, np.array([0.5, 0.0]), 0.02, np.array([1.0, 0.015]))
    assert check.statuses[1] == UNRESOLVED
    assert check.passed


def test_degenerate_comparison_requires_exact_zero_tail():
    t = np.array([0.0, 0.5, 1.0])
    assert compare_degenerate("hoeffding_stat", t, np.array([1.0, 0.0, 0.0]), np.zeros(3)).passed
    failed = compare_degenerate("hoeffding_stat", t, np.array([1.0, 1e-5, 0.0]), np.zeros(3))
    assert not failed.passed
    assert failed.violations == [0.5]


# -------------------------------------------------------------- Hoeffding


def test_exact_moments_against_enumeration():
    matrix = np.random.default_rng(3).random((4, 4))
    totals = [matrix[np.arange(4), list(p)].sum() for p in itertools.permutations(range(4))]
    assert exact_mean(matrix) == pytest.approx(np.mean(totals), rel=1e-12)
    assert exact_variance(matrix) == pytest.approx(np.var(totals), rel=1e-12)


def test_fixed_point_moments():
    identity = np.eye(10)
    assert exact_mean(identity) == pytest.approx(1.0)
    assert exact_variance(identity) == pytest.approx(1.0)


def test_permutations_are_valid_and_worker_independent(monkeypatch):
    first = sample_permutations(8, 25_000, seed=4)
    assert first.shape == (25_000, 8)
    np.testing.assert_array_equal(np.sort(first, axis=1), np.tile(np.arange(8), (25_000, 1)))
    monkeypatch.setattr(config, "MAX_WORKERS", 4)
    np.testing.assert_array_equal(sample_permutations(8, 25_000, seed=4), first)


@pytest.mark.slow
def test_permutations_are_uniform_over_all_orderings():
    rows = sample_permutations(4, 10**6, seed=11)
    # código base 4 de cada linha; só as 24 permutações aparecem
    codes = rows @ (4 ** np.arange(4))
    valid = sorted(np.array(p) @ (4 ** np.arange(4)) for p in itertools.permutations(range(4)))
    observed, counts = np.unique(codes, return_counts=True)
    np.testing.assert_array_equal(observed, valid)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_hoeffding_config_validation():
    with pytest.raises(InputValidationError) as excinfo:
        HoeffdingConfig(matrix=np.ones((2, 3)), n_samples=10, seed=1)
    assert excinfo.value.field == "matrix"
    with pytest.raises(InputValidationError) as excinfo:
        HoeffdingConfig(matrix=np.ones((3, 3)), n_samples=10, seed=None)
    assert excinfo.value.field == "seed"
    with pytest.raises(InputValidationError) as excinfo:
        HoeffdingConfig(matrix=np.ones((3, 3)), n_samples=10, seed=1, lipschitz_function="median")
    assert excinfo.value.field == "function"


def test_constant_matrix_is_degenerate():
    report = simulate_hoeffding(HoeffdingConfig(matrix=np.full((6, 6), 7.0), n_samples=2000, seed=1))
    assert report.statistics["sum_c2"] == 0.0
    assert report.statistics["max_centered"] == 0.0
    assert report.bounds["hoeffding_stat"].passed
    assert report.passed
    assert report.exploratory


def test_small_run_is_exploratory_and_deterministic(random_matrix):
    cfg = HoeffdingConfig(matrix=random_matrix(5, n=6), n_samples=500, seed=9)
    first = simulate_hoeffding(cfg).to_dict()
    second = simulate_hoeffding(cfg).to_dict()
    assert first == second
    assert first["exploratory"]
    other = simulate_hoeffding(HoeffdingConfig(matrix=random_matrix(5, n=6), n_samples=500, seed=10))
    assert other.to_dict()["table"] != first["table"]


def test_negative_mean_skips_chatterjee_bound():
    matrix = -np.random.default_rng(0).random((5, 5))
    report = simulate_hoeffding(HoeffdingConfig(matrix=matrix, n_samples=500, seed=2))
    assert report.bounds["chatterjee"].skipped
    assert "bound_chatterjee" not in report.columns
    assert report.notes


def test_cache_key_depends_on_every_input(random_matrix):
    matrix = random_matrix(1, n=5)
    base = HoeffdingConfig(matrix=matrix, n_samples=100, seed=1)
    assert base.cache_key() == HoeffdingConfig(matrix=matrix.copy(), n_samples=100, seed=1).cache_key()
    assert base.cache_key() != HoeffdingConfig(matrix=matrix, n_samples=100, seed=2).cache_key()
    assert base.cache_key().startswith("hoeffding_")


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_matrix_report_passes(random_matrix, seed):
    cfg = HoeffdingConfig(matrix=random_matrix(seed), n_samples=100_000, seed=seed,
                          lipschitz_function="sum")
    report = simulate_hoeffding(cfg)
    assert not report.exploratory
    assert report.bounds["hoeffding_stat"].passed
    assert report.bounds["hoeffding_lipschitz"].passed
    assert all(report.assertions.values())
    assert report.statistics["var_y"] == pytest.approx(report.statistics["var_y_exact"], rel=0.05)


@pytest.mark.slow
def test_fixed_point_count_respects_hoeffding_bound():
    report = simulate_hoeffding(HoeffdingConfig(matrix=np.eye(10), n_samples=100_000, seed=5))
    assert report.statistics["sum_c2"] == 10.0
    assert report.bounds["hoeffding_stat"].passed
    assert report.statistics["crossovers"]["chatterjee"] == pytest.approx(3.0)


# ---------------------------------------------------- acoplamento size-bias


def test_coupling_config_validation(gaussian):
    with pytest.raises(InputValidationError) as excinfo:
        SumCouplingConfig(components=[], n_samples=10, seed=1)
    assert excinfo.value.field == "components"
    with pytest.raises(InputValidationError) as excinfo:
        SumCouplingConfig(components=[gaussian], n_samples=10, seed=1)
    assert excinfo.value.field == "components"
    with pytest.raises(InputValidationError) as excinfo:
        SumCouplingConfig(components=[poisson(1.0)], n_samples=10, seed=1, shifts=[1.0, 1.0])
    assert excinfo.value.field == "shifts"


def test_poisson_sums_shift_by_one():
    cfg = SumCouplingConfig(components=[poisson(1.0), poisson(2.0)], n_samples=5000, seed=3)
    draws = sum_size_bias_coupling(cfg)
    np.testing.assert_array_equal(draws.difference, 1.0)
    assert set(np.unique(draws.index)) == {0, 1}


def test_point_masses_are_their_own_size_bias():
    cfg = SumCouplingConfig(components=[point_mass(1.0), point_mass(2.5)], n_samples=1000, seed=3)
    np.testing.assert_array_equal(sum_size_bias_coupling(cfg).difference, 0.0)
    report = verify_coupling_bound(cfg)
    assert report.statistics["max_difference"] == 0.0
    assert report.statistics["shifts"] == [0.0, 0.0]
    assert report.bounds["gamma_function"].skipped


def test_index_frequencies_follow_means():
    cfg = SumCouplingConfig(components=[poisson(1.0), poisson(3.0)], n_samples=40_000, seed=8)
    index = sum_size_bias_coupling(cfg).index
    assert np.mean(index == 1) == pytest.approx(0.75, abs=0.02)


def test_coupling_is_deterministic_across_batches():
    cfg = SumCouplingConfig(components=[poisson(2.0), bernoulli(0.4)], n_samples=23_456, seed=11)
    first, second = sum_size_bias_coupling(cfg), sum_size_bias_coupling(cfg)
    np.testing.assert_array_equal(first.y, second.y)
    np.testing.assert_array_equal(first.y_biased, second.y_biased)


@pytest.mark.slow
def test_poisson_coupling_report():
    components = [poisson(1.0), poisson(2.0), poisson(3.0)]
    report = verify_coupling_bound(SumCouplingConfig(components=components, n_samples=100_000, seed=21))
    assert report.statistics["shifts"] == [1.0, 1.0, 1.0]
    assert report.statistics["max_difference"] == 1.0
    assert report.statistics["violations"] == 0
    assert report.bounds["gamma_function"].passed
    assert report.statistics["mu"] == pytest.approx(6.0, abs=1e-9)


@pytest.mark.slow
def test_mixed_components_use_certified_shifts():
    bounded = build_distribution({
        "family": "table",
        "atoms": [{"x": 0, "p": 0.6}, {"x": 1, "p": 0.3}, {"x": 2, "p": 0.1}],
    })
    cfg = SumCouplingConfig(components=[poisson(2.0), bounded], n_samples=100_000, seed=4)
    assert cfg.resolved_shifts() == [1.0, 2.0]
    report = verify_coupling_bound(cfg)
    assert report.statistics["violations"] == 0
    assert report.statistics["max_difference"] <= 2.0
    assert report.statistics["replay"] == []


def test_provided_shift_too_small_reports_replay():
    cfg = SumCouplingConfig(components=[poisson(2.0)], n_samples=2000, seed=4, shifts=[0.5])
    report = verify_coupling_bound(cfg)
    assert report.statistics["violations"] == 2000
    assert len(report.statistics["replay"]) == 20
    assert report.statistics["replay"][0] == {"batch": 0, "position": 0}
    assert not report.passed


# ------------------------------------------------------------------- D e Ψ


@pytest.mark.parametrize("lam", [0.5, 4.0])
def test_single_poisson_d_psi(lam):
    estimate = estimate_D_psi(SumCouplingConfig(components=[poisson(lam)], n_samples=1, seed=0))
    assert estimate.mode == EXACT
    assert estimate.Psi == pytest.approx(0.0, abs=1e-5)
    assert estimate.D == pytest.approx(abs(1 - math.sqrt(lam)), abs=1e-6)
    assert estimate.A == 1.0


def test_point_masses_d_psi():
    cfg = SumCouplingConfig(components=[point_mass(1.0), point_mass(3.0)], n_samples=1, seed=0)
    estimate = estimate_D_psi(cfg)
    assert estimate.D == 1.0
    assert estimate.Psi == 0.0
    assert estimate.sigma2 == 0.0


def bernoulli_pair_oracle(p):
    """Enumeração das 16 combinações (X1, X2, I): g(y) = 1 - y/2"""
    mu, sigma = 2 * p, math.sqrt(2 * p * (1 - p))
    law = {}
    for x1, x2, index in itertools.product((0, 1), (0, 1), (0, 1)):
        prob = (p if x1 else 1 - p) * (p if x2 else 1 - p) * 0.5
        chosen = (x1, x2)[index]
        y = x1 + x2
        mass, total = law.get(y, (0.0, 0.0))
        law[y] = (mass + prob, total + prob * (1 - chosen))
    g = {y: total / mass for y, (mass, total) in law.items()}
    D = sum(mass * abs(1 - mu / sigma * g[y]) for y, (mass, _) in law.items())
    mean_g = sum(mass * g[y] for y, (mass, _) in law.items())
    psi = math.sqrt(sum(mass * (g[y] - mean_g) ** 2 for y, (mass, _) in law.items()))
    return D, psi


def test_bernoulli_pair_d_psi_matches_enumeration():
    p = 0.3
    cfg = SumCouplingConfig(components=[bernoulli(p), bernoulli(p)], n_samples=1, seed=0)
    estimate = estimate_D_psi(cfg, mode=EXACT)
    D, psi = bernoulli_pair_oracle(p)
    assert estimate.D == pytest.approx(D, abs=1e-12)
    assert estimate.Psi == pytest.approx(psi, abs=1e-12)
    assert estimate.Psi == pytest.approx(math.sqrt(2 * p * (1 - p)) / 2, abs=1e-12)
    assert estimate.D_interval == (estimate.D, estimate.D)
    assert estimate.A == 1.0


def test_sampling_mode_agrees_with_exact():
    p = 0.3
    cfg = SumCouplingConfig(components=[bernoulli(p), bernoulli(p)], n_samples=20_000, seed=6)
    exact = estimate_D_psi(cfg, mode=EXACT)
    sampled = estimate_D_psi(cfg, mode=SAMPLING)
    assert sampled.mode == SAMPLING
    assert sampled.D == pytest.approx(exact.D, abs=0.02)
    assert sampled.Psi == pytest.approx(exact.Psi, abs=0.02)
    assert sampled.D_interval[0] <= sampled.D <= sampled.D_interval[1]


def test_d_psi_rejects_continuous_components(exponential):
    cfg = SumCouplingConfig(components=[exponential], n_samples=10, seed=0, shifts=[1.0])
    with pytest.raises(InputValidationError) as excinfo:
        estimate_D_psi(cfg)
    assert excinfo.value.field == "components"
    with pytest.raises(InputValidationError):
        estimate_D_psi(SumCouplingConfig(components=[poisson(1.0)], n_samples=10, seed=0), mode=SAMPLING)
