import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nesterov_ode.objectives import (
    CompositeObjective,
    QuadraticSpec,
    as_composite,
    capped_linear,
    dense_quadratic,
    evaluate,
    grad,
    least_squares,
    log_sum_exp,
    logistic,
    make_standard_objectives,
    masked_least_squares,
    quadratic,
    smoothed_abs,
    spectral_norm_sq,
)
from nesterov_ode.prox import ProxSpec


def _catalog():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(12, 6))
    b = rng.normal(size=12)
    M = rng.normal(size=(3, 3))
    B = rng.normal(size=(6, 6))
    return [
        quadratic([0.04, 0.01, 1.0, 0.3, 2.0, 0.5]),
        dense_quadratic(B @ B.T + np.eye(6), rng.normal(size=6)),
        log_sum_exp(A, b, 2.0),
        least_squares(A, b),
        logistic(A[:, :6], (rng.random(12) < 0.5).astype(float)),
        masked_least_squares(rng.random((2, 3)) < 0.6, rng.normal(size=(2, 3))),
    ] + [M]


CATALOG = _catalog()[:-1]


def test_quadratic_value_and_gradient():
    f = quadratic([0.04, 0.01])
    x = np.array([1.0, 1.0])
    assert evaluate(f, x) == pytest.approx(0.025, abs=1e-15)
    assert np.allclose(grad(f, x), [0.04, 0.01], rtol=0, atol=1e-17)


def test_half_square():
    f = quadratic([1.0])
    assert evaluate(f, np.zeros(1)) == 0.0
    assert grad(f, np.ones(1))[0] == 1.0
    assert f.L == f.mu == 1.0


def test_dimension_mismatch():
    f = quadratic([1.0, 2.0])
    with pytest.raises(ValueError):
        evaluate(f, np.ones(3))
    with pytest.raises(ValueError):
        grad(f, np.ones(1))


def test_quadratic_spec():
    spec = QuadraticSpec((0.5, 2.0, 1.0))
    assert spec.L == 2.0 and spec.mu == 0.5
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(spec.objective().grad(x), spec.lam * x)
    with pytest.raises(ValueError):
        QuadraticSpec((1.0, 0.0))


def test_log_sum_exp_single_row_is_affine():
    a = np.array([[2.0, -1.0, 0.5]])
    f = log_sum_exp(a, np.array([0.3]), rho=4.0)
    for x in np.random.default_rng(0).normal(size=(5, 3)):
        assert evaluate(f, x) == pytest.approx(float(a[0] @ x) - 0.3, abs=1e-12)
        assert np.allclose(grad(f, x), a[0], atol=1e-14)


def test_log_sum_exp_against_exact_summation():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(20, 5))
    b = rng.normal(size=20) * math.sqrt(2)
    rho = 20.0
    f = log_sum_exp(A, b, rho)
    x = rng.normal(size=5)
    z = (A @ x - b) / rho
    # correctly rounded sum, independent of the order of the terms
    exact = rho * math.log(math.fsum(math.exp(v) for v in sorted(z, reverse=True)))
    assert abs(evaluate(f, x) - exact) <= 1e-12 * max(1.0, abs(exact))


def test_logistic_gradient_central_differences():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(8, 5))
    y = (rng.random(8) < 0.5).astype(float)
    f = logistic(A, y)
    x = rng.normal(size=5)
    h = 1e-6
    fd = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(5)])
    assert np.allclose(f.grad(x), fd, rtol=1e-6, atol=1e-8)


def test_logistic_lipschitz_dominates_hessian():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(10, 3))
    f = logistic(A, (rng.random(10) < 0.5).astype(float))
    worst = 0.0
    for x in rng.normal(size=(200, 3)) * 2:
        p = 1.0 / (1.0 + np.exp(-A @ x))
        H = A.T @ (A * (p * (1 - p))[:, None])
        worst = max(worst, np.linalg.eigvalsh(H)[-1])
    assert worst <= f.L * (1 + 1e-10)
    assert f.L == pytest.approx(np.linalg.norm(A, 2) ** 2 / 4, rel=1e-10)


def test_spectral_norm_power_iteration():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(30, 12))
    assert spectral_norm_sq(A) == pytest.approx(np.linalg.norm(A, 2) ** 2, rel=1e-10)


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.name)
def test_gradient_matches_finite_differences(f):
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.normal(size=f.n)
        d = rng.normal(size=f.n)
        d /= np.linalg.norm(d)
        h = 1e-6 * (1 + np.linalg.norm(x))
        fd = (f(x + h * d) - f(x - h * d)) / (2 * h)
        exact = float(f.grad(x) @ d)
        assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.name)
def test_lipschitz_sampled(f):
    rng = np.random.default_rng(3)
    for _ in range(100):
        x, y = rng.normal(size=(2, f.n)) * 3
        lhs = np.linalg.norm(f.grad(x) - f.grad(y))
        assert lhs <= f.L * np.linalg.norm(x - y) * (1 + 1e-8)


@pytest.mark.parametrize("f", [c for c in CATALOG if c.mu > 0], ids=lambda f: f.name)
def test_strong_convexity_midpoint(f):
    rng = np.random.default_rng(6)

    def shifted(z):
        return f(z) - 0.5 * f.mu * float(z @ z)

    for _ in range(100):
        x, y = rng.normal(size=(2, f.n)) * 2
        mid = shifted(0.5 * (x + y))
        assert mid <= 0.5 * (shifted(x) + shifted(y)) + 1e-10 * (1 + abs(mid))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 3, elements=st.floats(-1e3, 1e3)))
def test_smoothed_abs_is_huber(x):
    eps = 1e-2
    f = smoothed_abs(eps, 3)
    a = np.abs(x)
    expected = np.where(a <= eps, x * x / (2 * eps), a - eps / 2).sum()
    assert f(x) == pytest.approx(expected, rel=1e-12, abs=1e-15)
    assert np.all(np.abs(f.grad(x)) <= 1.0)


def test_capped_linear_pieces():
    f = capped_linear()
    assert f(np.array([2.0])) == 2.0
    assert f(np.array([-1.0])) == -0.5 == f.f_star
    assert f.grad(np.array([-1.0]))[0] == 0.0
    assert f.grad(np.array([0.5]))[0] == 1.0


def test_composite_value_and_domain():
    g = quadratic([1.0, 1.0])
    c = CompositeObjective(g, ProxSpec.nonneg())
    assert c.value(np.array([1.0, 2.0])) == 2.5
    assert c.value(np.array([-1.0, 2.0])) == np.inf
    assert c.gap is None
    assert as_composite(g).gap is g.gap
    assert np.array_equal(grad(c, np.ones(2)), np.ones(2))


def test_catalog_names():
    cat = make_standard_objectives()
    assert {"quadratic", "log_sum_exp", "least_squares", "logistic"} <= set(cat)


def test_invalid_constants():
    with pytest.raises(ValueError):
        quadratic([])
    with pytest.raises(ValueError):
        quadratic([1.0, -2.0])
