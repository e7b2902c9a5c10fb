"""
Testes das ordens estocástica, ponderada e convexa e do acoplamento por quantis
"""

import numpy as np
import pytest

import config
from distribution import DISCRETE, Distribution
from distribution_factory import build_distribution
from exceptions import InputValidationError, OrderViolationError
from experiment_report import dkw_epsilon, empirical_kolmogorov
from order_checker import (
    CouplingSampler,
    check_convex,
    check_st,
    check_weighted,
    quantile_coupling,
    sign_sequence,
    stop_loss,
)
from transforms import zero_bias


def uniform(a, b):
    return build_distribution({"family": "uniform", "params": {"a": a, "b": b}})


def gaussian(mean, var=1.0):
    return build_distribution({"family": "gaussian", "params": {"mean": mean, "var": var}})


def point_mass(value):
    return build_distribution({"family": "point-mass", "params": {"value": value}})


@pytest.fixture(scope="module")
def unit_uniform():
    return uniform(0.0, 1.0)


@pytest.fixture(scope="module")
def shifted_uniform():
    return uniform(0.5, 1.5)


def test_st_is_reflexive(gaussian):
    verdict = check_st(gaussian, gaussian)
    assert verdict.holds
    assert verdict.margin >= 0
    assert verdict.warning is None


def test_st_of_shifted_uniforms(unit_uniform, shifted_uniform):
    assert check_st(unit_uniform, shifted_uniform).holds
    reverse = check_st(shifted_uniform, unit_uniform)
    assert not reverse.holds
    assert reverse.margin == pytest.approx(-0.5, abs=1e-9)
    assert reverse.worst_point == pytest.approx(1.0, abs=1e-3)
    assert reverse.order_kind == "st"


def test_st_catches_jumps_of_discrete_laws():
    bern = build_distribution({"family": "bernoulli", "params": {"p": 0.5}})
    shifted = bern.shift(0.5)
    assert check_st(bern, shifted).holds
    verdict = check_st(shifted, bern)
    assert not verdict.holds
    assert verdict.margin == pytest.approx(-0.5)


def test_st_restricted_to_right_region(unit_uniform, shifted_uniform):
    verdict = check_st(shifted_uniform, unit_uniform, t_min=2.0)
    assert verdict.holds
    assert verdict.details["vacuous"]


def test_st_is_transitive_on_gaussian_triple():
    a, b, c = gaussian(0.0), gaussian(0.5), gaussian(1.0)
    assert check_st(a, b).holds and check_st(b, c).holds
    assert check_st(a, c).holds
    assert not check_st(c, a).holds


def test_weighted_order_at_gaussian_fixed_point(gaussian):
    transformed = zero_bias(gaussian).output
    verdict = check_weighted(transformed, gaussian, gaussian.variance, gaussian.variance)
    assert verdict.holds
    assert verdict.order_kind == "weighted"


def test_weighted_order_identical_laws_have_zero_margin(unit_uniform):
    verdict = check_weighted(unit_uniform, unit_uniform, 0.25, 0.25)
    assert verdict.holds
    assert verdict.margin == pytest.approx(0.0, abs=1e-15)


def test_weighted_order_fails_on_constants(unit_uniform):
    verdict = check_weighted(unit_uniform, unit_uniform, 2.0, 1.0)
    assert not verdict.holds
    assert verdict.details["constant_margin"] == -1.0
    assert verdict.margin == pytest.approx(-1.0)


@pytest.mark.parametrize("sigma2, k2", [(0.0, 1.0), (1.0, -1.0)])
def test_weighted_order_rejects_nonpositive_constants(unit_uniform, sigma2, k2):
    with pytest.raises(InputValidationError):
        check_weighted(unit_uniform, unit_uniform, sigma2, k2)


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_weighted_order_with_equal_constants_agrees_with_st(unit_uniform, shifted_uniform, c):
    for y, x in ((unit_uniform, shifted_uniform), (shifted_uniform, unit_uniform)):
        assert check_weighted(y, x, c, c).holds == check_st(y, x).holds


def test_stop_loss_of_discrete_law():
    bern = build_distribution({"family": "centered-bernoulli", "params": {"p": 0.5}})
    t = np.array([-1.0, -0.5, 0.0, 0.25, 0.5, 1.0])
    expected = [1.0, 0.5, 0.25, 0.125, 0.0, 0.0]
    np.testing.assert_allclose(stop_loss(bern, t), expected, atol=1e-15)


def test_stop_loss_of_continuous_law(unit_uniform):
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    expected = [1.5, 0.5, 0.125, 0.0, 0.0]
    np.testing.assert_allclose(stop_loss(unit_uniform, t), expected, atol=1e-7)


def test_convex_order_point_mass_and_bernoulli():
    center = point_mass(0.0)
    bern = build_distribution({"family": "centered-bernoulli", "params": {"p": 0.5}})
    assert check_convex(center, center).holds
    verdict = check_convex(center, bern)
    assert verdict.holds
    assert center.variance <= bern.variance + 1e-6
    reverse = check_convex(bern, center)
    assert not reverse.holds
    assert reverse.margin == pytest.approx(-0.25)
    assert reverse.worst_point == pytest.approx(0.0)


def test_convex_order_requires_equal_means():
    binom = build_distribution({"family": "binomial", "params": {"n": 2, "p": 0.5}})
    assert check_convex(point_mass(1.0), binom).holds
    verdict = check_convex(point_mass(1.5), binom)
    assert not verdict.holds
    assert verdict.details["mean_gap"] == pytest.approx(0.5)


def test_sign_sequence_of_exponential_against_gamma():
    exponential = build_distribution({"family": "exponential", "params": {"rate": 1.0}})
    gamma = build_distribution({"family": "gamma", "params": {"shape": 2.0, "rate": 2.0}})
    verdict = sign_sequence(exponential, gamma)
    assert verdict.holds
    assert verdict.details["pattern"] == "+-+"
    assert verdict.margin > 0
    reverse = sign_sequence(gamma, exponential)
    assert not reverse.holds
    assert reverse.details["pattern"] == "-+-"
    assert reverse.margin == -1.0


def test_quantile_coupling_of_shifted_uniforms(unit_uniform, shifted_uniform):
    sample = quantile_coupling(unit_uniform, shifted_uniform, seed=7, n=100_000)
    assert sample.violations == 0
    assert np.all(sample.first <= sample.second + config.EPS_ORDER)


def test_quantile_coupling_of_law_with_itself(gaussian):
    sample = quantile_coupling(gaussian, gaussian, seed=3, n=1000)
    np.testing.assert_array_equal(sample.first, sample.second)


def test_quantile_coupling_rejects_unordered_pair(unit_uniform, shifted_uniform):
    with pytest.raises(OrderViolationError) as excinfo:
        quantile_coupling(shifted_uniform, unit_uniform, seed=7, n=10)
    assert excinfo.value.verdict is not None
    assert not excinfo.value.verdict.holds


def test_bernoulli_and_its_zero_bias_are_not_st_ordered(centered_bernoulli_half):
    transformed = zero_bias(centered_bernoulli_half).output
    assert not check_st(centered_bernoulli_half, transformed).holds
    assert not check_st(transformed, centered_bernoulli_half).holds
    with pytest.raises(OrderViolationError):
        quantile_coupling(transformed, centered_bernoulli_half, seed=1, n=10)


def test_coupling_marginals_within_dkw_band(unit_uniform, shifted_uniform):
    n = 100_000
    sample = CouplingSampler(unit_uniform, shifted_uniform, seed=11).draw(n)
    threshold = dkw_epsilon(n, config.DKW_VALIDATION_CONFIDENCE)
    assert empirical_kolmogorov(sample.first, unit_uniform) <= threshold
    assert empirical_kolmogorov(sample.second, shifted_uniform) <= threshold


def test_coupling_sampler_is_deterministic():
    d = Distribution(DISCRETE, [0.0, 1.0, 2.0], [0.2, 0.3, 0.5])
    first = CouplingSampler(d, d.shift(1.0), seed=5).draw(500)
    second = CouplingSampler(d, d.shift(1.0), seed=5).draw(500)
    np.testing.assert_array_equal(first.first, second.first)
    np.testing.assert_array_equal(first.second - first.first, 1.0)
