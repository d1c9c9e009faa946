import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvsubspace.errors import BudgetExceeded, ConfigError, ZeroVariance
from pvsubspace.models import CountingModel
from pvsubspace.params import DIODE_SI_2CM2, sample_uniform
from pvsubspace.sobol import (PceExpansion, fit_pce, gauss_legendre_nodes, legendre_eval, project_grid,
                              sobol_indices, total_degree_indices)

REF_FIRST = np.array([0.56, 0.17, 0.21, 0.01, 0.00])
REF_TOTAL = np.array([0.61, 0.19, 0.25, 0.01, 0.00])


# -- quadrature and basis ---------------------------------------------------------

def test_one_point_rule():
    nodes, weights = gauss_legendre_nodes(1)
    np.testing.assert_array_equal(nodes, [0.0])
    np.testing.assert_array_equal(weights, [2.0])


def test_two_point_rule():
    nodes, weights = gauss_legendre_nodes(2)
    np.testing.assert_allclose(nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(weights, [1.0, 1.0], rtol=1e-15)


@pytest.mark.parametrize("q", [1, 3, 8, 17, 64])
def test_weights_sum_to_two(q):
    assert gauss_legendre_nodes(q)[1].sum() == pytest.approx(2.0, rel=1e-14)


def test_eight_point_rule_monomials():
    nodes, weights = gauss_legendre_nodes(8)
    for k in range(15):
        exact = 0.0 if k % 2 else 1.0 / (k + 1)
        assert np.sum(weights / 2 * nodes ** k) == pytest.approx(exact, abs=1e-14)
    assert np.sum(weights / 2 * nodes ** 14) == pytest.approx(1 / 15, abs=1e-14)


def test_rule_range_checked():
    for q in (0, 65):
        with pytest.raises(ConfigError):
            gauss_legendre_nodes(q)


def test_legendre_values():
    x = np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(legendre_eval(0, x), np.ones(7))
    assert legendre_eval(1, 1.0) == pytest.approx(math.sqrt(3))
    # P_2(x) = (3x^2 - 1)/2
    np.testing.assert_allclose(legendre_eval(2, x), math.sqrt(5) * (3 * x ** 2 - 1) / 2, atol=1e-15)


def test_legendre_orthonormal():
    nodes, weights = gauss_legendre_nodes(16)
    for j, k in itertools.product(range(11), repeat=2):
        integral = np.sum(weights / 2 * legendre_eval(j, nodes) * legendre_eval(k, nodes))
        assert integral == pytest.approx(float(j == k), abs=1e-12)


def test_total_degree_index_count():
    alphas = total_degree_indices(5, 5)
    assert len(alphas) == math.comb(10, 5)
    assert tuple(alphas[0]) == (0, 0, 0, 0, 0)
    assert len({tuple(a) for a in alphas}) == len(alphas)
    assert alphas.sum(axis=1).max() == 5


# -- projection -------------------------------------------------------------------

def test_constant_function():
    pce = fit_pce(lambda x: 3.0, 3, max_degree=4, points_per_dim=5)
    assert pce.coefficients[0] == pytest.approx(3.0, rel=1e-14)
    assert np.all(np.abs(pce.coefficients[1:]) <= 1e-14)


def test_linear_function_coefficients():
    pce = fit_pce(lambda x: x[0] + 2 * x[1], 5, max_degree=2, points_per_dim=4)
    coeffs = dict(pce.terms)
    assert coeffs[(1, 0, 0, 0, 0)] == pytest.approx(1 / math.sqrt(3), abs=1e-13)
    assert coeffs[(0, 1, 0, 0, 0)] == pytest.approx(2 / math.sqrt(3), abs=1e-13)
    rest = [abs(c) for a, c in pce.terms if a not in {(1, 0, 0, 0, 0), (0, 1, 0, 0, 0)}]
    assert max(rest) <= 1e-13


def test_grid_evaluation_count():
    counter = CountingModel(lambda x: float(np.sum(x ** 2)))
    pce = fit_pce(counter, 5, max_degree=5, points_per_dim=8)
    assert counter.count == 32768
    assert pce.evaluations == 32768


def test_budget_and_degree_checks():
    with pytest.raises(BudgetExceeded):
        fit_pce(lambda x: 0.0, 10, max_degree=2, points_per_dim=8, max_evaluations=10 ** 6)
    with pytest.raises(ConfigError):
        fit_pce(lambda x: 0.0, 2, max_degree=5, points_per_dim=5)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2 ** 31))
def test_polynomials_reproduced_exactly(dim, degree, seed):
    alphas = total_degree_indices(dim, degree)
    coeffs = np.random.default_rng(seed).normal(size=len(alphas))
    truth = PceExpansion(dim, degree, alphas, coeffs)
    fitted = fit_pce(lambda x: float(truth(x)[0]), dim, degree, degree + 1)
    np.testing.assert_allclose(fitted.coefficients, coeffs, atol=1e-12)


# -- Sobol' indices ---------------------------------------------------------------

def test_additive_indices():
    res = sobol_indices(fit_pce(lambda x: x[0] + 2 * x[1], 5, 2, 4))
    assert res.variance == pytest.approx(5 / 3, rel=1e-12)
    np.testing.assert_allclose(res.first_order, [0.2, 0.8, 0, 0, 0], atol=1e-10)
    np.testing.assert_allclose(res.total, res.first_order, atol=1e-10)


def test_additive_nonlinear_first_equals_total():
    res = sobol_indices(fit_pce(lambda x: np.sin(x[0]) + x[1] ** 3 + np.exp(x[2]), 3, 6, 8))
    np.testing.assert_allclose(res.first_order, res.total, atol=1e-10)


def test_interaction_splits_first_and_total():
    # f = x1 x2: all variance is interaction
    res = sobol_indices(fit_pce(lambda x: x[0] * x[1], 2, 2, 3))
    np.testing.assert_allclose(res.first_order, [0, 0], atol=1e-14)
    np.testing.assert_allclose(res.total, [1, 1], atol=1e-12)


@given(st.integers(0, 2 ** 31))
def test_first_order_never_exceeds_total(seed):
    alphas = total_degree_indices(3, 3)
    coeffs = np.random.default_rng(seed).normal(size=len(alphas))
    res = sobol_indices(PceExpansion(3, 3, alphas, coeffs))
    assert np.all(res.first_order <= res.total + 1e-15)
    assert np.all(res.total <= 1 + 1e-10)
    assert res.first_order.sum() <= 1 + 1e-10


def test_zero_variance():
    with pytest.raises(ZeroVariance):
        sobol_indices(fit_pce(lambda x: 1.0, 2, 2, 3))


# -- diode --------------------------------------------------------------------------

def test_diode_indices_match_published_values(diode_pce):
    res = sobol_indices(diode_pce)
    np.testing.assert_allclose(res.first_order, REF_FIRST, atol=0.03)
    np.testing.assert_allclose(res.total, REF_TOTAL, atol=0.03)


def test_diode_degree_convergence(diode_grid_values):
    base = sobol_indices(project_grid(diode_grid_values, 5, 5, 8))
    higher = sobol_indices(project_grid(diode_grid_values, 5, 7, 8))
    assert np.max(np.abs(higher.first_order - base.first_order)) <= 0.01
    assert np.max(np.abs(higher.total - base.total)) <= 0.01


@pytest.mark.slow
def test_diode_pce_moments_match_monte_carlo(diode_model, diode_pce):
    x = sample_uniform(DIODE_SI_2CM2, 10 ** 5, seed=4242)
    f = np.array([diode_model(z) for z in x])
    n = f.size
    mean_se = f.std(ddof=1) / math.sqrt(n)
    dev = f - f.mean()
    var_se = math.sqrt((np.mean(dev ** 4) - np.mean(dev ** 2) ** 2) / n)
    assert abs(diode_pce.mean - f.mean()) <= 3 * mean_se
    assert abs(diode_pce.variance - f.var(ddof=1)) <= 3 * var_se
