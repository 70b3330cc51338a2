import numpy as np
import pytest

from hardy_forge.loja import (GRID_STEP, LojasiewiczError, distance_to_variety, fit_distance_exponent,
                              fit_gradient_exponent, gradient_statistic, sample_points, verify_conic_refinement)
from hardy_forge.poly import parse


def test_distance_examples():
    assert distance_to_variety(parse("x1", 2), (3.0, 5.0)) == pytest.approx(3.0, abs=1e-8)
    assert distance_to_variety(parse("x1*x2", 2), (1.0, 1.0)) == pytest.approx(1.0, abs=1e-8)
    assert distance_to_variety(parse("x1*x2", 2), (0.0, 0.3)) == 0.0
    assert distance_to_variety(parse("x1^2+x2^2+1", 2), (0.0, 0.0)) == np.inf


def test_distance_to_circle_matches_geometry():
    P = parse("x1^2+x2^2-1", 2)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-2, 2, (20, 2)):
        assert distance_to_variety(P, x) == pytest.approx(abs(np.linalg.norm(x) - 1), abs=1e-7)


def test_gradient_exponent_line():
    fit = fit_gradient_exponent(parse("x1", 2), n_samples=500)
    assert fit.exponent_hat == 1.0 and fit.residual == 0


def test_gradient_exponent_circle_closed_form():
    P = parse("x1^2+x2^2", 2)
    fit = fit_gradient_exponent(P, n_samples=2000)
    assert abs(fit.exponent_hat - 0.5) <= 0.02
    # |grad P| = 2 sqrt(P) exactly, so the fitted constant is 2 at the exponent 1/2
    assert fit.constant_hat == pytest.approx(2.0, rel=1e-6)


def test_fit_is_a_grid_value_and_feasible():
    fit = fit_gradient_exponent(parse("x1*x2", 2), n_samples=1000)
    assert 0 < fit.exponent_hat <= 1
    assert abs(fit.exponent_hat / GRID_STEP - round(fit.exponent_hat / GRID_STEP)) < 1e-9
    mu = fit.exponent_hat
    assert np.all(np.log(fit.other) >= np.log(fit.constant_hat) + (1 - mu) * np.log(fit.abs_p) - 1e-12)


def test_statistic_monotone_in_mu():
    fit = fit_gradient_exponent(parse("x1*(x2^2+x3^2)+x2^3", 3), n_samples=1000)
    grid = np.arange(1, 121) * GRID_STEP
    vals = [gradient_statistic(fit.abs_p, fit.other, m) for m in grid]
    assert np.all(np.diff(vals) <= 1e-12)


@pytest.mark.parametrize("poly,n", [("x1*x2", 2), ("x1^2+x2^2", 2), ("x1*(x2^2+x3^2)+x2^3", 3)])
def test_homogeneous_scale_covariance(poly, n):
    P = parse(poly, n)
    x = sample_points(P, [(-1, 1)] * n, 800, seed=2)
    base = fit_gradient_exponent(P, points=x).exponent_hat
    for lam in (0.5, 2.0):
        assert fit_gradient_exponent(P, points=lam * x).exponent_hat == base


def test_degenerate_samples_rejected():
    with pytest.raises(LojasiewiczError):
        fit_gradient_exponent(parse("x1", 1), points=np.ones((10, 1)))


@pytest.mark.parametrize("poly,n,m", [("x1*x2", 2, 2), ("x1^2+x2^2", 2, 2), ("x1*(x2^2+x3^2)+x2^3", 3, 3)])
def test_conic_refinement(poly, n, m):
    rep = verify_conic_refinement(parse(poly, n), n_samples=2000)
    assert rep["within_bound"] and rep["mu_hat"] <= 1 / m + 0.05
    assert rep["scale_stable"]


def test_conic_refinement_needs_homogeneous():
    with pytest.raises(LojasiewiczError):
        verify_conic_refinement(parse("x2-x1^2", 2))


def test_distance_exponents():
    line = fit_distance_exponent(parse("x1", 2), n_samples=80)
    assert line.exponent_hat == 1.0
    dbl = fit_distance_exponent(parse("x1^2", 2), n_samples=80)
    assert abs(dbl.exponent_hat - 2.0) <= 0.05
    assert line.failures == 0 and dbl.failures == 0


@pytest.mark.parametrize("poly,mult", [("x1*x2", 2), ("x1^2+x2^2", 2)])
def test_distance_exponent_bounded_by_multiplicity(poly, mult):
    fit = fit_distance_exponent(parse(poly, 2), n_samples=80)
    assert 1.0 <= fit.exponent_hat <= mult + 0.1


def test_fit_reports_serialize():
    fit = fit_gradient_exponent(parse("x1*x2", 2), n_samples=300, seed=5)
    js = fit.to_json()
    assert js["seed"] == 5 and js["n_samples"] == len(fit.abs_p) and js["kind"] == "gradient"
