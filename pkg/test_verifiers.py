"""
Testes dos certificados: MGF, log-concavidade forte, equivalência sub-gaussiana,
dominação por kernel, critério de φ' e condição de deslocamento
"""

import math

import numpy as np
import pytest
from scipy import stats

from certificate_verifier import (
    CONCLUSION_VIOLATED,
    HYPOTHESIS_FAILED,
    VERIFIED,
    check_density_shift,
    check_kernel_domination,
    check_mgf_condition,
    check_phi_prime,
    check_strong_logconcavity,
    find_min_shift,
    lambda_grid,
    verify_subgaussian_equivalence,
)
from distribution import CONTINUOUS, Distribution
from distribution_factory import build_distribution
from exceptions import InputValidationError
from order_checker import check_st
from transforms import size_bias


def centered_bernoulli(p):
    return build_distribution({"family": "centered-bernoulli", "params": {"p": p}})


def point_mass(value):
    return build_distribution({"family": "point-mass", "params": {"value": value}})


def quartic_perturbation(k, half_width=9.0, points=4001):
    """Gaussiana padrão vezes e^{-x⁴/k}: φ'' = 1 + 12x²/k >= 1"""
    x = np.linspace(-half_width, half_width, points)
    return Distribution(CONTINUOUS, x, stats.norm.pdf(x) * np.exp(-x ** 4 / k), label=f"quartic({k:g})").center()


def test_mgf_condition_of_gaussian_is_tight(gaussian):
    certificate = check_mgf_condition(gaussian, 1.0)
    assert certificate.verdict == VERIFIED
    assert certificate.hypothesis_checks[0].margin == pytest.approx(0.0, abs=1e-5)
    assert certificate.parameters["lambda_points"] == 41


def test_mgf_condition_of_centered_bernoulli(centered_bernoulli_half):
    certificate = check_mgf_condition(centered_bernoulli_half, 0.25)
    assert certificate.verified
    assert certificate.witness is None


def test_mgf_condition_fails_for_heavy_right_tail(exponential):
    certificate = check_mgf_condition(exponential.center(), 1.0)
    assert certificate.verdict == HYPOTHESIS_FAILED
    assert certificate.witness > 0
    assert certificate.hypothesis_checks[0].margin < -1e-3


def test_mgf_condition_rejects_uncentered_law(exponential):
    with pytest.raises(InputValidationError) as excinfo:
        check_mgf_condition(exponential, 1.0)
    assert excinfo.value.field == "mean"


def test_lambda_grid_respects_truncation(gaussian, centered_bernoulli_half):
    grid = lambda_grid(gaussian)
    assert grid[0] == pytest.approx(1e-3)
    assert grid[-1] < 2.0
    assert lambda_grid(centered_bernoulli_half)[-1] == pytest.approx(10.0)


def test_strong_logconcavity_of_gaussian(gaussian):
    assert check_strong_logconcavity(gaussian, 1.0).verified
    failed = check_strong_logconcavity(gaussian, 0.5)
    assert failed.verdict == HYPOTHESIS_FAILED
    assert failed.witness is not None


def test_uniform_is_not_strongly_logconcave(uniform):
    # log f constante: resta x²/(2k²), estritamente convexo
    certificate = check_strong_logconcavity(uniform, 1.0)
    assert certificate.verdict == HYPOTHESIS_FAILED


def test_strong_logconcavity_requires_density(centered_bernoulli_half):
    with pytest.raises(InputValidationError) as excinfo:
        check_strong_logconcavity(centered_bernoulli_half, 1.0)
    assert excinfo.value.field == "kind"


def test_subgaussian_equivalence_at_gaussian_fixed_point(gaussian):
    k2 = gaussian.variance
    assert check_strong_logconcavity(gaussian, k2).verified
    certificate = verify_subgaussian_equivalence(gaussian, k2)
    assert certificate.verdict == VERIFIED
    assert all(h.holds for h in certificate.hypothesis_checks)
    assert all(c.holds for c in certificate.conclusion_checks)
    assert len(certificate.notes) == 2


def test_subgaussian_equivalence_of_asymmetric_bernoulli():
    d = centered_bernoulli(0.9)
    certificate = verify_subgaussian_equivalence(d, d.variance)
    assert certificate.verdict == HYPOTHESIS_FAILED
    failing = [h for h in certificate.hypothesis_checks if not h.holds]
    assert failing
    assert certificate.witness == failing[0].witness


def test_subgaussian_equivalence_of_uniform(uniform):
    certificate = verify_subgaussian_equivalence(uniform, 1.0)
    assert certificate.verdict == VERIFIED
    # as dominações certificadas implicam as cotas da MGF nas duas caudas
    assert all(c.holds for c in certificate.conclusion_checks)
    assert certificate.parameters["sigma2"] == pytest.approx(1 / 3, rel=1e-6)


def test_strong_logconcavity_ignores_subnormal_tail():
    d = quartic_perturbation(5.0)
    tiny = np.finfo(float).tiny
    assert np.any((d.weights > 0) & (d.weights < tiny))
    certificate = check_strong_logconcavity(d, 1.0)
    assert certificate.verdict == VERIFIED
    assert check_strong_logconcavity(quartic_perturbation(5.0, half_width=6.0), 1.0).verified


@pytest.mark.parametrize("k", [2.0, 5.0, 10.0, 20.0, 50.0])
def test_logconcave_perturbations_are_subgaussian(k):
    d = quartic_perturbation(k)
    assert d.variance < 1.0
    assert check_strong_logconcavity(d, 1.0).verified
    certificate = verify_subgaussian_equivalence(d, 1.0)
    assert [h.holds for h in certificate.hypothesis_checks] == [True, True]
    assert all(c.holds for c in certificate.conclusion_checks)
    assert certificate.verdict == VERIFIED
    assert all(c.tolerance == pytest.approx(1e-6) for c in certificate.conclusion_checks)


def test_certificates_are_reproducible(gaussian):
    first = verify_subgaussian_equivalence(gaussian, 1.0).to_dict()
    second = verify_subgaussian_equivalence(gaussian, 1.0).to_dict()
    assert first == second


def test_kernel_domination_against_itself(gaussian):
    certificate = check_kernel_domination(gaussian, gaussian, 0.0, 1.0)
    assert certificate.verdict == VERIFIED
    assert certificate.parameters["resolved_nodes"] > 100


def test_kernel_domination_fails_for_heavier_tail(gaussian):
    mixture = build_distribution({
        "family": "gaussian-mixture",
        "params": {"weights": [0.5, 0.5], "means": [0.0, 0.0], "vars": [0.5, 1.5]},
    })
    certificate = check_kernel_domination(mixture, gaussian, 0.0, lambda x: np.ones_like(x))
    assert certificate.verdict == HYPOTHESIS_FAILED
    monotone = certificate.hypothesis_checks[0]
    assert not monotone.holds
    assert monotone.witness > 0


def test_kernel_domination_input_checks(gaussian):
    wider = build_distribution({"family": "gaussian", "params": {"var": 2.0}})
    with pytest.raises(InputValidationError) as excinfo:
        check_kernel_domination(wider, gaussian, 0.0, 1.0)
    assert excinfo.value.field == "variance"
    with pytest.raises(InputValidationError) as excinfo:
        check_kernel_domination(gaussian, gaussian, -1.0, 1.0)
    assert excinfo.value.field == "x0"


def test_phi_prime_of_gaussian(gaussian):
    certificate = check_phi_prime(gaussian, -1.0, 1.0)
    assert certificate.verdict == VERIFIED
    for check in certificate.hypothesis_checks:
        assert check.margin == pytest.approx(0.0, abs=1e-6)
    constants = certificate.details["comparison_constants"]
    assert constants["K(x_r)"] == pytest.approx(1.0, abs=1e-6)
    assert certificate.details["convex_addendum"] is not None


def test_phi_prime_fails_for_laplace(laplace):
    assert laplace.variance == pytest.approx(2.0, rel=1e-4)
    certificate = check_phi_prime(laplace, -1.0, 1.0)
    assert certificate.verdict == HYPOTHESIS_FAILED
    assert certificate.witness > 2.0


def test_phi_prime_of_quartic_perturbation_depends_on_x_r():
    # φ' = x + 0.4x³ só alcança x/σ² para x >= sqrt((1/σ² - 1)/0.4) ≈ 1.25
    d = quartic_perturbation(10.0)
    assert d.variance == pytest.approx(0.616, abs=0.01)
    crossing = math.sqrt((1 / d.variance - 1) / 0.4)
    assert 1.0 < crossing < 1.5

    failed = check_phi_prime(d, -1.0, 1.0)
    assert failed.verdict == HYPOTHESIS_FAILED
    assert 1.0 <= abs(failed.witness) < crossing

    certificate = check_phi_prime(d, -1.5, 1.5)
    assert certificate.verdict == VERIFIED
    assert all(c.holds for c in certificate.conclusion_checks)


def test_phi_prime_requires_points_around_zero(gaussian):
    with pytest.raises(InputValidationError) as excinfo:
        check_phi_prime(gaussian, 0.5, 1.0)
    assert excinfo.value.field == "x_l"


def test_density_shift_of_poisson(poisson2):
    certificate = check_density_shift(poisson2, 1.0, 1.0)
    assert certificate.verdict == VERIFIED
    assert certificate.hypothesis_checks[0].margin == pytest.approx(0.0, abs=1e-9)
    assert check_st(size_bias(poisson2).output, poisson2.shift(1.0), t_min=1.0).holds


def test_density_shift_is_vacuous_above_point_mass():
    certificate = check_density_shift(point_mass(2.0), 1.0, 3.0)
    assert certificate.verified
    assert certificate.parameters["hypothesis_start"] == 3.0


def test_density_shift_of_exponential_violates_conclusion(exponential):
    certificate = check_density_shift(exponential, 1.0, 0.0)
    assert certificate.verdict == CONCLUSION_VIOLATED
    hypothesis = certificate.hypothesis_checks[0]
    assert not hypothesis.holds
    assert hypothesis.witness == pytest.approx(math.e, abs=0.05)


def test_density_shift_input_checks(poisson2, gaussian):
    with pytest.raises(InputValidationError) as excinfo:
        check_density_shift(poisson2, 0.5, 1.0)
    assert excinfo.value.field == "c"
    with pytest.raises(InputValidationError) as excinfo:
        check_density_shift(gaussian, 1.0, 0.0)
    assert excinfo.value.field == "support"


def test_min_shift_of_poisson():
    d = build_distribution({"family": "poisson", "params": {"lambda": 5.0}})
    assert find_min_shift(d, 1.0) == pytest.approx(1.0)


def test_min_shift_of_point_mass_is_zero():
    assert find_min_shift(point_mass(2.0), 3.0) == 0.0


@pytest.mark.slow
def test_min_shift_of_exponential_follows_truncation(exponential):
    c = find_min_shift(exponential, 0.0)
    assert c is not None
    assert c == pytest.approx(math.log(exponential.hull[1]), abs=0.02)
    assert c == pytest.approx(3.32, abs=0.02)
