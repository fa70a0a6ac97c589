"""Projected gradient descent onto a bounded sparsity model.

Each iteration takes a gradient step and projects back onto the model
intersected with the radius-``r`` ball, starting from zero. With valid
curvature constants, the distance to any feasible reference point shrinks by
a factor ``2*gamma`` per iteration up to a term proportional to the reference
gradient restricted to its best double-union support; :func:`verify_contraction`
checks that inequality on a recorded trace.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .glm import gradient, hessian_quadratic_form, loss
from .model import model_expand
from .projection import euclidean_norm, project_bounded, project_unbounded
from .smrh import step_size_optimal

CONTRACTION_TOL = 1e-9


class DegenerateStep(ArithmeticError):
    """Curvature along the step direction is numerically zero."""


@dataclass(frozen=True)
class FixedOptimal:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"FixedOptimal needs beta > 0, got {self.beta}")
        step_size_optimal(self.alpha, self.beta)

    @property
    def eta(self):
        return step_size_optimal(self.alpha, self.beta)


@dataclass(frozen=True)
class FixedValue:
    eta: float

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"step size must be positive, got {self.eta}")


@dataclass(frozen=True)
class AdaptiveQuadraticForm:
    """Step ``1 / q`` with ``q`` the curvature quotient along a model-feasible
    direction (previous iterate difference, or the model-projected gradient
    on the first step)."""


StepPolicy = Union[FixedOptimal, FixedValue, AdaptiveQuadraticForm]


@dataclass(frozen=True)
class SolverConfig:
    step_policy: StepPolicy
    radius: float
    max_iters: int = 500
    rel_tol: float = 1e-8
    reference: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be nonnegative")


@dataclass
class SolverTrace:
    """Per-iteration record.

    ``objective``, ``supports`` and ``dist_to_ref`` describe the iterates
    ``theta^(0) .. theta^(T)`` (length ``T + 1``); ``eta`` and ``step_norm``
    describe the ``T`` steps between them.
    """

    eta: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    supports: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    dist_to_ref: Optional[list] = None
    iterates: list = field(default_factory=list)

    @property
    def n_steps(self):
        return len(self.eta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "objective", "eta", "support_size", "step_norm", "dist_to_ref"])
        for i in range(len(self.objective)):
            step = i < self.n_steps
            w.writerow([
                i,
                repr(self.objective[i]),
                repr(self.eta[i]) if step else "",
                len(self.supports[i]),
                repr(self.step_norm[i]) if step else "",
                repr(self.dist_to_ref[i]) if self.dist_to_ref is not None else "",
            ])
        return buf.getvalue()


def adaptive_step(family, dataset, theta, delta):
    """Inverse curvature quotient ``||D||^2 / <D, H(theta) D>``."""
    delta = np.asarray(delta, dtype=np.float64)
    nd = float(delta @ delta)
    if nd <= 0:
        raise ValueError("direction must be nonzero")
    q = hessian_quadratic_form(family, dataset, theta, delta) / nd
    if q <= 1e-12:
        raise DegenerateStep(f"flat curvature direction (quotient {q:.3e})")
    return 1.0 / q


def _step_size(policy, model, family, dataset, theta, prev_theta, grad):
    if isinstance(policy, (FixedOptimal, FixedValue)):
        return policy.eta
    if prev_theta is not None:
        delta = theta - prev_theta
        if np.any(delta):
            return adaptive_step(family, dataset, theta, delta)
    delta = project_unbounded(model, grad).vector
    if not np.any(delta):
        # gradient vanishes on every generator, so any step leaves theta fixed
        return 1.0
    return adaptive_step(family, dataset, theta, delta)


def fit(model, family, dataset, config: SolverConfig):
    """Run projected gradient descent from ``theta = 0``.

    Halts after ``max_iters`` steps or once
    ``||theta^(i+1) - theta^(i)|| <= rel_tol * max(1, ||theta^(i)||)``.

    Returns
    -------
    theta_hat : ndarray
    trace : SolverTrace
    """
    if model.p != dataset.p:
        raise ValueError(f"model has p={model.p} but data has p={dataset.p}")
    family.check_response(dataset.y)
    r = config.radius
    ref = None
    if config.reference is not None:
        ref = np.asarray(config.reference, dtype=np.float64)
        if ref.shape != (model.p,):
            raise ValueError("reference vector has the wrong dimension")
    theta = np.zeros(model.p)
    prev = None
    trace = SolverTrace(dist_to_ref=[] if ref is not None else None)

    def record(th):
        trace.objective.append(loss(family, dataset, th))
        trace.supports.append(tuple(int(i) for i in np.flatnonzero(th)))
        trace.iterates.append(th.copy())
        if ref is not None:
            trace.dist_to_ref.append(euclidean_norm(th - ref))

    record(theta)
    for _ in range(config.max_iters):
        g = gradient(family, dataset, theta)
        eta = _step_size(config.step_policy, model, family, dataset, theta, prev, g)
        chi = theta - eta * g
        new = project_bounded(model, r, chi).vector
        step = euclidean_norm(new - theta)
        trace.eta.append(float(eta))
        trace.step_norm.append(step)
        prev, theta = theta, new
        record(theta)
        if step <= config.rel_tol * max(1.0, euclidean_norm(prev)):
            break
    return theta, trace


def reference_gradient_term(model, r, family, dataset, theta_bar):
    """Support of the double-union projection of the reference gradient, and
    the gradient norm on it.

    The support does not depend on ``r``, so the unbounded projection is used.
    """
    theta_bar = np.asarray(theta_bar, dtype=np.float64)
    if theta_bar.shape != (model.p,):
        raise ValueError("reference vector has the wrong dimension")
    if not model.contains(np.flatnonzero(theta_bar)):
        raise ValueError("reference support is not in the model")
    if euclidean_norm(theta_bar) > r:
        raise ValueError("reference lies outside the radius-r ball")
    g = gradient(family, dataset, theta_bar)
    res = project_unbounded(model_expand(model, 2), g)
    return res.support, euclidean_norm(g[list(res.support)])


@dataclass
class ContractionReport:
    """Outcome of :func:`verify_contraction`.

    ``violations`` lists ``(i, lhs, rhs)`` for each step where
    ``||theta^(i+1) - ref|| > 2 gamma_i ||theta^(i) - ref|| + 2 eta_i G + tol``;
    ``envelope_violations`` does the same for the cumulative fixed-step bound
    (only checked when ``gamma`` and ``eta`` are constant).
    """

    steps_checked: int
    violations: list
    envelope_violations: list
    min_slack: float

    @property
    def ok(self):
        return not self.violations and not self.envelope_violations


def fixed_step_envelope(i, gamma, eta, grad_term, ref_norm):
    """Cumulative bound on ``||theta^(i) - ref||`` for a constant step."""
    rho = 2.0 * gamma
    geom = float(i) if rho == 1.0 else (1.0 - rho**i) / (1.0 - rho)
    return rho**i * ref_norm + 2.0 * eta * geom * grad_term


def verify_contraction(trace, theta_bar, gamma, eta, grad_term, tol=CONTRACTION_TOL):
    """Check the per-step contraction inequality along a recorded trace.

    ``gamma`` and ``eta`` may be scalars or per-step sequences.
    """
    if trace.dist_to_ref is None:
        raise ValueError("trace has no reference distances; rerun fit with a reference")
    dist = trace.dist_to_ref
    steps = len(dist) - 1
    gammas = _per_step(gamma, steps)
    etas = _per_step(eta, steps)
    violations = []
    min_slack = math.inf
    for i in range(steps):
        rhs = 2.0 * gammas[i] * dist[i] + 2.0 * etas[i] * grad_term
        slack = rhs - dist[i + 1]
        min_slack = min(min_slack, slack)
        if slack < -tol:
            violations.append((i, dist[i + 1], rhs))
    envelope = []
    if np.isscalar(gamma) and np.isscalar(eta):
        ref_norm = euclidean_norm(theta_bar)
        for i in range(len(dist)):
            bound = fixed_step_envelope(i, gamma, eta, grad_term, ref_norm)
            if dist[i] > bound + tol:
                envelope.append((i, dist[i], bound))
    return ContractionReport(steps, violations, envelope, min_slack)


def _per_step(value, steps) -> Sequence[float]:
    if np.isscalar(value):
        return [float(value)] * steps
    value = list(value)
    if len(value) < steps:
        raise ValueError("per-step sequence shorter than the trace")
    return value
