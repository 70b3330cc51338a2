import numpy as np
import pytest

from hardy_forge.poly import parse
from hardy_forge.testfunc import Bump1D, LogBump1D, TestFunction

CROSS = parse("x1*x2", 2)


def _fd_grad(f, x, h=1e-6):
    return np.array([(f.value(x + h * e) - f.value(x - h * e)) / (2 * h) for e in np.eye(len(x))])


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_gradient_matches_finite_differences(a):
    f = TestFunction(CROSS, (0.3, 0.2), 0.5, 0.01, vanishing=a)
    rng = np.random.default_rng(0)
    checked = 0
    for x in f.center + rng.uniform(-0.5, 0.5, (300, 2)):
        g = f.gradient(x)
        if np.linalg.norm(g) < 1e-6:
            continue
        assert np.allclose(g, _fd_grad(f, x), rtol=1e-4, atol=1e-4 * np.linalg.norm(g))
        checked += 1
    assert checked > 50


def test_vanishes_on_tube_and_outside_ball():
    f = TestFunction(CROSS, (0.0, 0.0), 1.0, 0.05)
    rng = np.random.default_rng(1)
    x = rng.uniform(-1.5, 1.5, (4000, 2))
    v = f.value(x)
    assert np.all(v[np.abs(CROSS.numeric(x)) < 0.05] == 0)
    assert np.all(v[np.linalg.norm(x, axis=1) >= 1.0] == 0)
    assert np.any(v > 0)


def test_jax_hessian_matches_finite_differences():
    f = TestFunction(parse("x1^2+x2^2-1/4", 2), (0.4, 0.1), 0.6, 0.01, vanishing=1.0)
    x = np.array([0.7, 0.3])
    H = f.derivative_tensor(x, 2)
    h = 1e-5
    fd = np.stack([(f.gradient(x + h * e) - f.gradient(x - h * e)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(H, fd, rtol=1e-4, atol=1e-6)
    assert f.derivative_norm2(x[None], 2)[0] == pytest.approx(np.sum(H * H), rel=1e-10)


def test_order_one_routes_agree():
    f = TestFunction(CROSS, (0.4, 0.4), 0.3, 0.01)
    x = np.random.default_rng(2).uniform(0.2, 0.6, (50, 2))
    jax_vals = np.sum(np.stack([f.derivative_tensor(p, 1) for p in x]) ** 2, axis=1)
    assert np.allclose(f.derivative_norm2(x, 1), jax_vals, rtol=1e-10, atol=1e-14)


def test_high_order_falls_back_to_differences():
    f = TestFunction(CROSS, (0.5, 0.5), 0.3, 0.01)
    v = f.derivative_norm2(np.array([[0.5, 0.55]]), 5)
    assert np.isfinite(v).all() and v[0] > 0


def test_scaled_is_composition():
    P = parse("x1^2+x2^2", 2)
    f = TestFunction(P, (0.5, 0.2), 0.4, 0.01, vanishing=1.0)
    g = f.scaled(2.0)
    x = np.random.default_rng(3).uniform(-0.1, 0.6, (100, 2))
    assert np.allclose(g.value(x), f.value(2.0 * x), rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError):
        TestFunction(parse("x2-x1^2", 2), (0, 0), 1, 0.1).scaled(2)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        TestFunction(CROSS, (0, 0), 0.0, 0.1)
    with pytest.raises(ValueError):
        TestFunction(CROSS, (0,), 1.0, 0.1)


def test_log_bump_derivative():
    f = LogBump1D(-0.5, (0.0, 0.4), (1.0, 0.3), (1.0, -0.7))
    x = np.exp(np.linspace(-0.9, 0.9, 31))
    h = 1e-7
    fd = (f.value(x + h) - f.value(x - h)) / (2 * h)
    assert np.allclose(f.derivative(x), fd, rtol=1e-5, atol=1e-8)


def test_bump1d_derivatives():
    b = Bump1D(1.0, 0.5)
    x = np.linspace(0.6, 1.4, 17)
    h = 1e-5
    fd = (b.derivative(x + h, 1) - b.derivative(x - h, 1)) / (2 * h)
    assert np.allclose(b.derivative(x, 2), fd, rtol=1e-5, atol=1e-7)
    assert np.all(b.value(np.array([0.4, 1.6])) == 0)
