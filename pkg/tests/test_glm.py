import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ALL_FAMILIES, random_dataset
from modelsparse.glm import (
    Dataset,
    FamilyError,
    Linear,
    LinearPredictorOverflow,
    Logistic,
    Poisson,
    curvature_bounds,
    gradient,
    hessian_bilinear_form,
    hessian_quadratic_form,
    loss,
    make_family,
    psi,
    psi_prime,
    psi_second,
    restricted_hessian,
)


def test_logistic_psi_at_zero():
    f = Logistic()
    assert psi(f, 0.0) == pytest.approx(math.log(2), abs=1e-15)
    assert psi_prime(f, 0.0) == 0.5
    assert psi_second(f, 0.0) == 0.25


def test_linear_psi():
    f = Linear(1.0)
    assert psi(f, 2.0) == 2.0
    np.testing.assert_array_equal(psi_second(f, np.linspace(-5, 5, 11)), 1.0)
    assert psi(Linear(2.0), 2.0) == 0.5


def test_poisson_psi():
    f = Poisson()
    t = np.linspace(-3, 3, 13)
    assert psi(f, 0.0) == 1.0
    np.testing.assert_array_equal(psi_prime(f, t), np.exp(t))
    np.testing.assert_array_equal(psi_second(f, t), np.exp(t))


def test_logistic_overflow_safe():
    f = Logistic()
    t = np.array([-800.0, -40.0, 40.0, 800.0])
    with np.errstate(over="raise"):
        v = psi(f, t)
        d1 = psi_prime(f, t)
        d2 = psi_second(f, t)
    assert v[3] == 800.0 and v[0] >= 0 and v[0] < 1e-300
    np.testing.assert_allclose(v[1:3], [math.log1p(math.exp(-40)), 40 + math.log1p(math.exp(-40))])
    assert d1[0] == 0.0 and d1[3] == 1.0
    assert np.all(d2 >= 0) and np.all(np.isfinite(d2))


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
def test_non_finite_argument(family):
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(FamilyError):
            psi(family, bad)


def test_linear_sigma_validation():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(FamilyError):
            Linear(bad)
    with pytest.raises(FamilyError):
        make_family("probit")
    assert make_family("linear", 0.5) == Linear(0.5)


def test_curvature_examples():
    for r, u in [(1.0, 1.0), (2.0, 0.3), (5.0, 3.0)]:
        d, big_d = curvature_bounds(Logistic(), r, u)
        assert big_d == 0.25
        assert d == pytest.approx(0.25 / math.cosh(r * u / 2) ** 2, rel=1e-13)
    assert curvature_bounds(Logistic(), 3.0, 0.0) == (0.25, 0.25)
    assert curvature_bounds(Linear(0.5), 3.0, 2.0) == (4.0, 4.0)


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
@pytest.mark.parametrize("r,u", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7), (3.0, 0.0)])
def test_curvature_matches_grid_oracle(family, r, u):
    # oracle: brute-force extremes of psi''(t u) on a fine grid including the endpoints
    t = np.linspace(-r, r, 20001)
    vals = family.psi_second(t * u)
    d, big_d = curvature_bounds(family, r, u)
    assert d == pytest.approx(vals.min(), rel=1e-12)
    assert big_d == pytest.approx(vals.max(), rel=1e-12)


def test_poisson_curvature_example():
    d, big_d = curvature_bounds(Poisson(), 1.0, 1.0)
    assert d == pytest.approx(math.exp(-1), rel=1e-15)
    assert big_d == pytest.approx(math.e, rel=1e-15)


def test_curvature_preconditions():
    with pytest.raises(ValueError):
        curvature_bounds(Logistic(), 0.0, 1.0)
    with pytest.raises(ValueError):
        curvature_bounds(Logistic(), 1.0, -0.1)


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
def test_psi_second_nonnegative_on_grid(family):
    assert np.all(family.psi_second(np.linspace(-20, 20, 4001)) >= 0)


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
def test_curvature_envelope_sandwich(family, rng):
    r = rng.uniform(0.1, 4.0, 1000)
    u = rng.uniform(0.0, 3.0, 1000)
    t = rng.uniform(-1.0, 1.0, 1000) * r
    for ri, ui, ti in zip(r, u, t):
        d, big_d = curvature_bounds(family, ri, ui)
        val = float(family.psi_second(ti * ui))
        assert d * (1 - 1e-12) <= val <= big_d * (1 + 1e-12)


def test_loss_examples():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((7, 3))
    y = rng.integers(0, 2, 7).astype(float)
    assert loss(Logistic(), Dataset(x, y), np.zeros(3)) == pytest.approx(math.log(2), abs=1e-15)
    assert loss(Linear(1.0), Dataset([[1.0, 0.0]], [1.0]), np.array([1.0, 0.0])) == -0.5
    assert loss(Poisson(), Dataset([[1.0]], [2.0]), np.array([0.0])) == 1.0


def test_gradient_examples():
    g = gradient(Logistic(), Dataset([[1.0, 0.0]], [0.0]), np.zeros(2))
    np.testing.assert_array_equal(g, [0.5, 0.0])
    rng = np.random.default_rng(4)
    x = rng.standard_normal((10, 4))
    theta = np.array([0.0, 1.5, 0.0, -2.0])
    g = gradient(Linear(1.0), Dataset(x, x @ theta), theta)
    np.testing.assert_allclose(g, 0.0, atol=1e-15)


def test_hessian_examples(rng):
    x = rng.standard_normal((15, 5))
    ds = Dataset(x, rng.integers(0, 2, 15).astype(float))
    s = (1, 3, 4)
    xs = x[:, list(s)]
    gram = xs.T @ xs / 15
    for theta in (np.zeros(5), rng.standard_normal(5)):
        np.testing.assert_allclose(restricted_hessian(Linear(1.0), ds, theta, s), gram, atol=1e-14)
    np.testing.assert_allclose(restricted_hessian(Logistic(), ds, np.zeros(5), s), gram / 4, atol=1e-14)


def _fd_gradient(family, ds, theta, h=1e-5):
    g = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (loss(family, ds, theta + e) - loss(family, ds, theta - e)) / (2 * h)
    return g


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_gradient_matches_fd_logistic_example():
    rng = np.random.default_rng(20)
    ds = random_dataset(Logistic(), 20, 6, rng)
    theta = rng.standard_normal(6)
    assert _rel(_fd_gradient(Logistic(), ds, theta), gradient(Logistic(), ds, theta)) <= 1e-6


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
def test_derivatives_match_finite_differences(family, rng):
    for _ in range(10):
        n = int(rng.integers(5, 51))
        p = int(rng.integers(1, 13))
        ds = random_dataset(family, n, p, rng, scale=0.5)
        theta = rng.standard_normal(p) * 0.5
        g = gradient(family, ds, theta)
        assert _rel(_fd_gradient(family, ds, theta), g) <= 1e-6
        delta = rng.standard_normal(p)
        h = 1e-5
        fd = delta @ (gradient(family, ds, theta + h * delta)
                      - gradient(family, ds, theta - h * delta)) / (2 * h)
        q = hessian_quadratic_form(family, ds, theta, delta)
        assert abs(fd - q) <= 1e-5 * abs(q)
        s = tuple(range(p))
        np.testing.assert_allclose(delta @ restricted_hessian(family, ds, theta, s) @ delta, q,
                                   rtol=1e-12)


def test_bilinear_form_symmetric(rng):
    ds = random_dataset(Poisson(), 30, 6, rng, scale=0.4)
    theta = rng.standard_normal(6) * 0.3
    u, v = rng.standard_normal((2, 6))
    a = hessian_bilinear_form(Poisson(), ds, theta, u, v)
    b = hessian_bilinear_form(Poisson(), ds, theta, v, u)
    assert a == pytest.approx(b, rel=1e-13)
    assert a == pytest.approx(u @ restricted_hessian(Poisson(), ds, theta, tuple(range(6))) @ v,
                              rel=1e-12)


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
def test_restricted_hessian_psd(family, rng):
    ds = random_dataset(family, 12, 8, rng, scale=0.5)
    h = restricted_hessian(family, ds, rng.standard_normal(8) * 0.5, (0, 2, 5, 7))
    np.testing.assert_array_equal(h, h.T)
    assert np.linalg.eigvalsh(h).min() >= -1e-14


@pytest.mark.parametrize("family", ALL_FAMILIES, ids=repr)
@given(seed=st.integers(0, 2**32 - 1))
def test_loss_convex_along_segments(family, seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(family, 20, 5, rng, scale=0.5)
    a, b = rng.standard_normal((2, 5)) * 2
    mid = loss(family, ds, (a + b) / 2)
    assert mid <= 0.5 * loss(family, ds, a) + 0.5 * loss(family, ds, b) + 1e-12


def test_poisson_overflow_guard():
    ds = Dataset([[1.0], [2.0]], [0.0, 3.0])
    with pytest.raises(LinearPredictorOverflow):
        loss(Poisson(), ds, np.array([400.0]))
    assert isinstance(LinearPredictorOverflow("x"), ArithmeticError)
    assert np.isfinite(loss(Poisson(), ds, np.array([300.0])))


def test_response_validation():
    x = [[1.0], [0.5]]
    with pytest.raises(FamilyError, match="0 or 1"):
        loss(Logistic(), Dataset(x, [0.0, -1.0]), np.zeros(1))
    with pytest.raises(FamilyError):
        gradient(Poisson(), Dataset(x, [1.5, 2.0]), np.zeros(1))
    with pytest.raises(FamilyError):
        loss(Poisson(), Dataset(x, [-1.0, 2.0]), np.zeros(1))
    assert np.isfinite(loss(Linear(), Dataset(x, [-1.3, 2.0]), np.zeros(1)))


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 2)), np.ones(2))
    with pytest.raises(ValueError):
        Dataset([[1.0, math.nan]], [0.0])
    ds = Dataset(np.ones((3, 2)), np.zeros(3))
    assert (ds.n, ds.p) == (3, 2)
    with pytest.raises(ValueError):
        ds.x[0, 0] = 2.0
    with pytest.raises(ValueError, match="dimension"):
        loss(Linear(), ds, np.zeros(3))
