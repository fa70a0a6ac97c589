"""Synthetic GLM data and the empirical error decomposition.

Randomness comes from numpy's PCG64 bit generator. A single integer seed is
expanded through ``SeedSequence`` into independent child streams, one per
purpose (support choice, signs, covariates, responses), so changing how one
stream is consumed never perturbs the others.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .glm import Dataset, Linear, Logistic, Poisson
from .model import EnumerationBudgetExceeded, enumerate_supports, model_expand
from .projection import euclidean_norm, project_bounded, rescale_to_ball
from .smrh import extreme_eigenvalues
from .solver import reference_gradient_term

POISSON_MAX_RATE_EXPONENT = 20.0
_STREAMS = ("support", "signs", "covariates", "responses")


def rng_streams(seed):
    """Named independent PCG64 generators derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(_STREAMS, children)}


def gen_parameter(model, r, k_active, seed, magnitude=1.0):
    """Random model-sparse truth with ``k_active`` entries of size ``magnitude``.

    Picks a random generator with at least ``k_active`` coordinates, puts
    random-sign ``magnitude`` values on ``k_active`` of them, then pulls the
    vector onto the radius-``r`` ball.
    """
    if not magnitude > 0:
        raise ValueError("magnitude must be positive")
    if not 1 <= k_active <= model.order:
        raise ValueError(f"k_active must be in [1, {model.order}], got {k_active}")
    streams = rng_streams(seed)
    s = model.random_generator(streams["support"], min_size=k_active)
    chosen = sorted(int(i) for i in streams["support"].choice(s, k_active, replace=False))
    theta = np.zeros(model.p)
    signs = streams["signs"].choice([-1.0, 1.0], size=k_active)
    theta[chosen] = magnitude * signs
    theta, _ = rescale_to_ball(theta, r)
    return theta


def gen_dataset(family, theta_star, n, seed, covariate_scale=None, noise_std=None):
    """Draw ``n`` covariate/response pairs from the canonical GLM at ``theta_star``.

    Covariates are standard Gaussian rows, each pulled onto the ball of
    radius ``covariate_scale`` (default 1 for logistic, no rescaling
    otherwise). Responses have conditional mean ``psi'(<x, theta_star>)``:

    * linear: mean plus Gaussian noise of std ``noise_std`` (default sigma),
    * logistic: Bernoulli,
    * Poisson: Poisson, refused when ``|<x, theta_star>| > 20``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    theta_star = np.asarray(theta_star, dtype=np.float64)
    streams = rng_streams(seed)
    x = streams["covariates"].standard_normal((n, theta_star.shape[0]))
    if covariate_scale is None and isinstance(family, Logistic):
        covariate_scale = 1.0
    if covariate_scale is not None:
        if not covariate_scale > 0:
            raise ValueError("covariate_scale must be positive")
        norms = np.sqrt(np.einsum("ij,ij->i", x, x))
        factor = np.minimum(1.0, covariate_scale / np.maximum(norms, 1e-300))
        x = x * factor[:, None]
        # guard against the rescaled norm rounding above the cap
        over = np.sqrt(np.einsum("ij,ij->i", x, x)) > covariate_scale
        while np.any(over):
            x[over] = np.nextafter(x[over], 0.0)
            over = np.sqrt(np.einsum("ij,ij->i", x, x)) > covariate_scale
    t = x @ theta_star
    rng = streams["responses"]
    if isinstance(family, Linear):
        std = family.sigma if noise_std is None else float(noise_std)
        if std < 0:
            raise ValueError("noise_std must be nonnegative")
        y = family.psi_prime(t) + std * rng.standard_normal(n)
    elif isinstance(family, Logistic):
        y = (rng.random(n) < family.psi_prime(t)).astype(np.float64)
    elif isinstance(family, Poisson):
        if np.any(np.abs(t) > POISSON_MAX_RATE_EXPONENT):
            raise ValueError(
                f"Poisson rate overflow: |<x, theta*>| exceeds {POISSON_MAX_RATE_EXPONENT:g}"
            )
        y = rng.poisson(np.exp(t)).astype(np.float64)
    else:
        raise TypeError(f"unsupported family {family!r}")
    return Dataset(x, y)


@dataclass(frozen=True)
class ErrorDecomposition:
    """Empirical analogs of the bias/noise terms around ``theta_perp``.

    ``sigma_stat_hat`` and ``delta1_hat`` are sample averages standing in for
    population expectations.
    """

    theta_perp: np.ndarray
    delta2: float
    sigma_stat_hat: float
    delta1_hat: float
    w_hat: float
    w_hat_method: str
    grad_term: float
    grad_support: tuple
    z_norm: float
    operator_bound_holds: bool

    def to_dict(self):
        d = asdict(self)
        d["theta_perp"] = [float(v) for v in self.theta_perp]
        d["grad_support"] = list(self.grad_support)
        return d


def restricted_operator_norm(dataset, s):
    """``||X_S||_op`` for the ``1/sqrt(n)``-scaled design."""
    xs = dataset.x[:, list(s)]
    gram = xs.T @ xs / dataset.n
    return math.sqrt(max(extreme_eigenvalues(0.5 * (gram + gram.T))[1], 0.0))


def max_restricted_operator_norm(model, dataset, cap=100_000, samples=2000, seed=0):
    """Largest restricted operator norm over the double-union model.

    Exact when the double union is enumerable under ``cap``; otherwise the
    maximum over ``samples`` random generators, flagged ``"sampled"``.
    """
    double = model_expand(model, 2)
    try:
        supports = enumerate_supports(double, cap)
        method = "exact"
    except EnumerationBudgetExceeded:
        rng = np.random.Generator(np.random.PCG64(seed))
        supports = {double.random_generator(rng) for _ in range(samples)}
        supports = sorted(supports)
        method = "sampled"
    return max(restricted_operator_norm(dataset, s) for s in supports), method


def error_decomposition(model, r, family, dataset, theta_star, cap=100_000):
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if theta_star.shape != (model.p,) or dataset.p != model.p:
        raise ValueError("theta_star, model and data dimensions disagree")
    family.check_response(dataset.y)
    theta_perp = project_bounded(model, r, theta_star).vector
    t_star = dataset.x @ theta_star
    t_perp = dataset.x @ theta_perp
    family.check_linear_predictor(t_star)
    family.check_linear_predictor(t_perp)
    mean_star = family.psi_prime(t_star)
    mean_perp = family.psi_prime(t_perp)
    sigma_stat = float(np.mean((mean_star - dataset.y) ** 2))
    delta1 = float(np.mean((mean_perp - mean_star) ** 2))
    delta2 = euclidean_norm(theta_perp - theta_star)
    w_hat, method = max_restricted_operator_norm(model, dataset, cap)
    support, grad_term = reference_gradient_term(model, r, family, dataset, theta_perp)
    z = (mean_perp - dataset.y) / math.sqrt(dataset.n)
    z_norm = euclidean_norm(z)
    return ErrorDecomposition(
        theta_perp=theta_perp,
        delta2=delta2,
        sigma_stat_hat=sigma_stat,
        delta1_hat=delta1,
        w_hat=w_hat,
        w_hat_method=method,
        grad_term=grad_term,
        grad_support=support,
        z_norm=z_norm,
        operator_bound_holds=bool(grad_term <= w_hat * z_norm + 1e-10),
    )


def statistical_error_bound(decomp, gamma, eta, i):
    """Terms of the iterate-vs-truth bound after ``i`` steps (reported, not asserted).

    Returns a dict with the contraction, statistical and bias parts; the
    noise and bias terms use the empirical ``sigma_stat_hat``/``delta1_hat``.
    """
    rho = 2.0 * gamma
    if rho >= 1.0:
        return None
    coef = 2.0 * eta * decomp.w_hat / (1.0 - rho)
    return {
        "contraction": rho**i * euclidean_norm(decomp.theta_perp),
        "statistical": coef * decomp.sigma_stat_hat,
        "bias": coef * decomp.delta1_hat + decomp.delta2,
    }
