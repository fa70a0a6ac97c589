"""Model-restricted Hessian constants and the step-size quantities built on them.

``alpha`` and ``beta`` bound the curvature ``<D, H(theta) D> / ||D||^2`` over
all pairs with ``supp(D) | supp(theta)`` inside the triple-union model and
``||theta|| <= r``. :func:`analytic_smrh_bounds` certifies such bounds by
sandwiching every restricted Hessian between curvature-envelope-weighted Gram
matrices; :func:`empirical_smrh_probe` only samples quotients and certifies
nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .glm import hessian_quadratic_form
from .model import EnumerationBudgetExceeded, enumerate_supports, model_expand

MAX_EIGEN_DIM = 256


class NotIdentifiable(ArithmeticError):
    """Smallest restricted curvature is numerically zero."""


@dataclass(frozen=True)
class SmrhEstimate:
    alpha: float
    beta: float
    mu: float
    radius: float
    method: str
    supports_examined: int

    def __post_init__(self):
        if not 0 < self.beta <= self.alpha:
            raise ValueError(f"need 0 < beta <= alpha, got beta={self.beta}, alpha={self.alpha}")


def extreme_eigenvalues(m, tol=1e-12):
    """Smallest and largest eigenvalue of a symmetric matrix (cyclic Jacobi)."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_EIGEN_DIM:
        raise ValueError(f"matrix dimension {m.shape[0]} exceeds {MAX_EIGEN_DIM}")
    if m.shape[0] == 0:
        raise ValueError("empty matrix")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within tolerance 1e-12")
    ev = kernels.jacobi_eigenvalues(m, tol)
    return float(ev.min()), float(ev.max())


def restricted_envelope_grams(family, dataset, r, s):
    """Lower and upper curvature-weighted Gram matrices on support ``s``."""
    xs = dataset.x[:, list(s)]
    u = np.sqrt(np.einsum("ij,ij->i", xs, xs))
    d, big_d = family.curvature_bounds(r, u)
    lower = (xs.T * d) @ xs / dataset.n
    upper = (xs.T * big_d) @ xs / dataset.n
    return 0.5 * (lower + lower.T), 0.5 * (upper + upper.T)


def analytic_smrh_bounds(model, dataset, family, r, cap=100_000) -> SmrhEstimate:
    """Certified ``(alpha, beta)`` over every maximal support of the triple union.

    Smaller supports need no separate check: a principal submatrix has its
    spectrum inside the parent's (Cauchy interlacing).

    Raises
    ------
    EnumerationBudgetExceeded
        If the triple-union model has more than ``cap`` generators; use
        :func:`empirical_smrh_probe` instead.
    NotIdentifiable
        If the certified ``beta`` is at most ``1e-12``.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if model.p != dataset.p:
        raise ValueError(f"model has p={model.p} but data has p={dataset.p}")
    family.check_response(dataset.y)
    triple = model_expand(model, 3)
    try:
        supports = enumerate_supports(triple, cap)
    except EnumerationBudgetExceeded as exc:
        raise EnumerationBudgetExceeded(
            exc.count, exc.cap, "use empirical_smrh_probe for non-certified bounds"
        ) from None
    alpha = -math.inf
    beta = math.inf
    for s in supports:
        lower, upper = restricted_envelope_grams(family, dataset, r, s)
        beta = min(beta, extreme_eigenvalues(lower)[0])
        alpha = max(alpha, extreme_eigenvalues(upper)[1])
    if beta <= 1e-12:
        raise NotIdentifiable(
            f"model not identifiable from data: restricted curvature beta={beta:.3e}"
        )
    return SmrhEstimate(alpha, beta, alpha / beta, float(r), "analytic", len(supports))


def _uniform_in_ball(rng, dim, r):
    z = rng.standard_normal(dim)
    z /= np.linalg.norm(z)
    return z * r * rng.random() ** (1.0 / dim)


def sample_feasible_pair(model, r, rng):
    """Random ``(theta, delta)`` sharing one random generator of the triple union.

    ``theta`` is uniform in the radius-``r`` ball on that generator, ``delta``
    is standard Gaussian on it.
    """
    triple = model_expand(model, 3)
    s = list(triple.random_generator(rng))
    theta = np.zeros(model.p)
    theta[s] = _uniform_in_ball(rng, len(s), r)
    delta = np.zeros(model.p)
    delta[s] = rng.standard_normal(len(s))
    return theta, delta


def empirical_smrh_probe(model, dataset, family, r, trials, seed):
    """Min and max of sampled curvature quotients ``<D, H D> / ||D||^2``.

    Sampled extremes are not certified bounds.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    qs = np.empty(trials)
    for i in range(trials):
        theta, delta = sample_feasible_pair(model, r, rng)
        qs[i] = hessian_quadratic_form(family, dataset, theta, delta) / float(delta @ delta)
    return float(qs.min()), float(qs.max())


def step_size_optimal(alpha, beta):
    """``2 / (alpha + beta)``, the step minimizing the contraction factor."""
    if not 0 < beta <= alpha:
        raise ValueError(f"need 0 < beta <= alpha, got alpha={alpha}, beta={beta}")
    return 2.0 / (alpha + beta)


def contraction_gamma(eta, eta_star, mu):
    """Per-iteration contraction coefficient; the distance shrinks by ``2*gamma``."""
    if not (eta > 0 and eta_star > 0):
        raise ValueError("step sizes must be positive")
    if mu < 1:
        raise ValueError(f"mu must be >= 1, got {mu}")
    ratio = eta / eta_star
    return ratio * (mu - 1.0) / (mu + 1.0) + abs(ratio - 1.0)


def basic_ineq_bound(eta, alpha, beta):
    """Right-hand factor bounding ``|<u,v> - eta <u, H v>| / (||u|| ||v||)``."""
    return eta * (alpha - beta) / 2.0 + abs(eta * (alpha + beta) / 2.0 - 1.0)
