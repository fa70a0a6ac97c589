"""Canonical GLM families and the empirical negative log-likelihood.

For a log-partition function ``psi`` and data ``(x_i, y_i)``, the loss is

    f(theta) = (1/n) sum_i psi(<x_i, theta>) - y_i <x_i, theta>

with gradient ``(1/n) sum_i (psi'(t_i) - y_i) x_i`` and Hessian
``(1/n) sum_i psi''(t_i) x_i x_i^T``. The response normalizer ``Z(y)`` is
dropped since it does not depend on ``theta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POISSON_MAX_LINEAR_PREDICTOR = 700.0


class FamilyError(ValueError):
    """Data or parameters incompatible with the chosen family."""


class LinearPredictorOverflow(FamilyError, ArithmeticError):
    """Linear predictor outside the range where the family is evaluable."""


def _finite(t):
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise FamilyError("non-finite argument to log-partition function")
    return t


@dataclass(frozen=True)
class Linear:
    """Gaussian family, ``psi(t) = t^2 / (2 sigma^2)``."""

    sigma: float = 1.0
    name = "linear"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise FamilyError(f"sigma must be positive and finite, got {self.sigma}")

    def psi(self, t):
        t = _finite(t)
        return t * t / (2.0 * self.sigma**2)

    def psi_prime(self, t):
        return _finite(t) / self.sigma**2

    def psi_second(self, t):
        return np.full_like(_finite(t), 1.0 / self.sigma**2)

    def curvature_bounds(self, r, u):
        c = np.full_like(np.asarray(u, dtype=np.float64), 1.0 / self.sigma**2)
        return c, c.copy()

    def check_response(self, y):
        pass

    def check_linear_predictor(self, t):
        pass


@dataclass(frozen=True)
class Logistic:
    """Bernoulli family with responses in {0, 1}, ``psi(t) = log(1 + e^t)``."""

    name = "logistic"

    def psi(self, t):
        t = _finite(t)
        return np.log1p(np.exp(-np.abs(t))) + np.maximum(t, 0.0)

    def psi_prime(self, t):
        t = _finite(t)
        e = np.exp(-np.abs(t))
        return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))

    def psi_second(self, t):
        e = np.exp(-np.abs(_finite(t)))
        return e / (1.0 + e) ** 2

    def curvature_bounds(self, r, u):
        # psi'' is even and decreasing in |t|: extremes at t = 0 and |t| = r u
        u = np.asarray(u, dtype=np.float64)
        return self.psi_second(r * u), np.full_like(u, 0.25)

    def check_response(self, y):
        if not np.all((y == 0) | (y == 1)):
            raise FamilyError("logistic responses must be 0 or 1")

    def check_linear_predictor(self, t):
        pass


@dataclass(frozen=True)
class Poisson:
    """Poisson family, ``psi(t) = e^t``."""

    name = "poisson"

    def psi(self, t):
        return np.exp(_finite(t))

    psi_prime = psi
    psi_second = psi

    def curvature_bounds(self, r, u):
        u = np.asarray(u, dtype=np.float64)
        return np.exp(-r * u), np.exp(r * u)

    def check_response(self, y):
        if not np.all((y >= 0) & (y == np.floor(y))):
            raise FamilyError("Poisson responses must be nonnegative integers")

    def check_linear_predictor(self, t):
        if np.any(np.abs(t) > POISSON_MAX_LINEAR_PREDICTOR):
            raise LinearPredictorOverflow(
                "Poisson linear predictor exceeds "
                f"{POISSON_MAX_LINEAR_PREDICTOR:g} in magnitude; exp would overflow"
            )


FAMILIES = {"linear": Linear, "logistic": Logistic, "poisson": Poisson}


def make_family(name, sigma=1.0):
    if name == "linear":
        return Linear(sigma)
    try:
        return FAMILIES[name]()
    except KeyError:
        raise FamilyError(f"unknown family {name!r}") from None


@dataclass(frozen=True)
class Dataset:
    """Covariates ``x`` (n x p) and responses ``y`` (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("covariate matrix must be 2-D")
        if y.shape != (x.shape[0],):
            raise ValueError(
                f"response length {y.shape} does not match {x.shape[0]} samples"
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("dataset must have n >= 1 and p >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]


def psi(family, t):
    return family.psi(t)


def psi_prime(family, t):
    return family.psi_prime(t)


def psi_second(family, t):
    return family.psi_second(t)


def curvature_bounds(family, r, u):
    """``(d, D)``: min and max of ``psi''(t u)`` over ``t`` in ``[-r, r]``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if np.any(np.asarray(u) < 0):
        raise ValueError("u must be nonnegative")
    d, big_d = family.curvature_bounds(r, u)
    if np.ndim(u) == 0:
        return float(d), float(big_d)
    return d, big_d


def linear_predictor(family, dataset, theta):
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (dataset.p,):
        raise ValueError(
            f"dimension mismatch: theta has shape {theta.shape}, data has p={dataset.p}"
        )
    family.check_response(dataset.y)
    t = dataset.x @ theta
    family.check_linear_predictor(t)
    return t


def loss(family, dataset, theta) -> float:
    t = linear_predictor(family, dataset, theta)
    return float(np.mean(family.psi(t) - dataset.y * t))


def gradient(family, dataset, theta) -> np.ndarray:
    t = linear_predictor(family, dataset, theta)
    return dataset.x.T @ (family.psi_prime(t) - dataset.y) / dataset.n


def restricted_hessian(family, dataset, theta, s) -> np.ndarray:
    """Hessian of the loss at ``theta`` restricted to rows/cols ``s``."""
    t = linear_predictor(family, dataset, theta)
    xs = dataset.x[:, list(s)]
    w = family.psi_second(t)
    h = (xs.T * w) @ xs / dataset.n
    return 0.5 * (h + h.T)


def hessian_quadratic_form(family, dataset, theta, delta) -> float:
    """``<delta, H(theta) delta>`` without forming the Hessian."""
    t = linear_predictor(family, dataset, theta)
    xd = dataset.x @ np.asarray(delta, dtype=np.float64)
    return float(np.mean(family.psi_second(t) * xd * xd))


def hessian_bilinear_form(family, dataset, theta, u, v) -> float:
    """``<u, H(theta) v>``."""
    t = linear_predictor(family, dataset, theta)
    xu = dataset.x @ np.asarray(u, dtype=np.float64)
    xv = dataset.x @ np.asarray(v, dtype=np.float64)
    return float(np.mean(family.psi_second(t) * xu * xv))
