"""Command-line front end: ``modelsparse {gen,fit,smrh,project,check}``.

Exit status is 0 on success, 2 for malformed input or configuration and 3
for numerical failures (non-identifiable model, flat curvature, overflow,
enumeration budget). Failures print a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .glm import FamilyError, make_family
from .io import (
    FormatError,
    atomic_write_text,
    canonical_json,
    config_hash,
    dataset_to_csv,
    file_digest,
    load_dataset,
    load_model,
    load_vector,
    model_to_dict,
    vector_to_csv,
)
from .model import EnumerationBudgetExceeded
from .projection import project_bounded
from .smrh import (
    NotIdentifiable,
    analytic_smrh_bounds,
    contraction_gamma,
    empirical_smrh_probe,
    step_size_optimal,
)
from .solver import (
    AdaptiveQuadraticForm,
    FixedOptimal,
    FixedValue,
    SolverConfig,
    fit,
    reference_gradient_term,
    verify_contraction,
)
from .synth import error_decomposition, gen_dataset, gen_parameter, statistical_error_bound

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
FILE_ARGS = ("model", "data", "reference", "vector")


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, EXIT_CONFIG)


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    sys.exit(code)


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _step_policy(text):
    if text in ("optimal", "adaptive"):
        return text
    if text.startswith("fixed:"):
        _positive_float(text[len("fixed:"):])
        return text
    raise argparse.ArgumentTypeError("expected fixed:<eta>, optimal or adaptive")


def build_parser():
    parser = _Parser(prog="modelsparse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True, family=True, radius_default=None):
        p.add_argument("--model", required=True, help="model JSON")
        if data:
            p.add_argument("--data", required=True, help="dataset CSV (y,x0..)")
        if family:
            p.add_argument("--family", required=True, choices=["linear", "logistic", "poisson"])
            p.add_argument("--sigma", type=_positive_float, default=1.0)
        if radius_default is None:
            p.add_argument("--radius", type=_positive_float, required=True)
        else:
            p.add_argument("--radius", type=_positive_float, default=radius_default)
        p.add_argument("--out", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    common(g, data=False, radius_default=math.inf)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k-active", type=int, default=None)
    g.add_argument("--magnitude", type=_positive_float, default=1.0)
    g.add_argument("--covariate-scale", type=_positive_float, default=None)
    g.add_argument("--noise-std", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)

    f = sub.add_parser("fit", help="run projected gradient descent")
    common(f)
    f.add_argument("--step", type=_step_policy, default="adaptive")
    f.add_argument("--max-iters", type=int, default=500)
    f.add_argument("--rel-tol", type=float, default=1e-8)
    f.add_argument("--reference", default=None, help="reference vector CSV")
    f.add_argument("--cap", type=int, default=100_000)

    s = sub.add_parser("smrh", help="estimate restricted curvature constants")
    common(s)
    s.add_argument("--cap", type=int, default=100_000)
    s.add_argument("--trials", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("project", help="project a vector onto the model")
    common(p, data=False, family=False, radius_default=math.inf)
    p.add_argument("--vector", required=True, help="vector CSV, one value per line")

    c = sub.add_parser("check", help="empirical error decomposition around the truth")
    common(c)
    c.add_argument("--reference", required=True, help="true parameter CSV")
    c.add_argument("--cap", type=int, default=100_000)
    return parser


def _config(args):
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key == "out":
            continue
        if key in FILE_ARGS and value is not None:
            cfg[key] = {"sha256": file_digest(value)}
        elif isinstance(value, float) and math.isinf(value):
            cfg[key] = "inf"
        else:
            cfg[key] = value
    return cfg


def _envelope(args, payload):
    cfg = _config(args)
    out = {"config": cfg, "config_hash": config_hash(cfg), "version": __version__}
    out.update(payload)
    return out


def _json_float(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _family(args):
    return make_family(args.family, args.sigma)


def _load_inputs(args, need_data=True):
    model = load_model(args.model)
    dataset = load_dataset(args.data) if need_data else None
    if dataset is not None and dataset.p != model.p:
        raise CliError(f"model has p={model.p} but data has {dataset.p} covariates")
    return model, dataset


def cmd_gen(args):
    model = load_model(args.model)
    family = _family(args)
    k_active = args.k_active if args.k_active is not None else model.order
    theta = gen_parameter(model, args.radius, k_active, args.seed, args.magnitude)
    data = gen_dataset(family, theta, args.n, args.seed, args.covariate_scale, args.noise_std)
    out = Path(args.out)
    truth_path = out.with_suffix(".theta.csv")
    sidecar = _envelope(args, {
        "family": family.name,
        "sigma": args.sigma if family.name == "linear" else None,
        "seed": args.seed,
        "model": model_to_dict(model),
        "theta_star": [float(v) for v in theta],
        "truth_file": truth_path.name,
    })
    atomic_write_text(out, dataset_to_csv(data))
    atomic_write_text(truth_path, vector_to_csv(theta))
    atomic_write_text(out.with_suffix(".json"), canonical_json(sidecar))


def _constants(model, dataset, family, radius, cap):
    try:
        return analytic_smrh_bounds(model, dataset, family, radius, cap)
    except EnumerationBudgetExceeded:
        return None


def cmd_fit(args):
    model, dataset = _load_inputs(args)
    family = _family(args)
    reference = load_vector(args.reference) if args.reference else None
    if reference is not None and reference.shape != (model.p,):
        raise CliError("reference vector has the wrong dimension")
    est = None
    if args.step == "optimal":
        est = analytic_smrh_bounds(model, dataset, family, args.radius, args.cap)
        policy = FixedOptimal(est.alpha, est.beta)
    elif args.step == "adaptive":
        policy = AdaptiveQuadraticForm()
    else:
        policy = FixedValue(float(args.step[len("fixed:"):]))
    config = SolverConfig(policy, args.radius, args.max_iters, args.rel_tol, reference)
    theta, trace = fit(model, family, dataset, config)

    summary = {
        "iterations": trace.n_steps,
        "final_objective": trace.objective[-1],
        "support": list(trace.supports[-1]),
        "norm": float(np.linalg.norm(theta)),
        "step_policy": args.step,
    }
    if reference is not None:
        summary["verification"] = _verify(model, dataset, family, args, trace, reference, est)
    out = Path(args.out)
    atomic_write_text(out, vector_to_csv(theta))
    atomic_write_text(out.with_suffix(".trace.csv"), trace.to_csv())
    atomic_write_text(out.with_suffix(".json"), canonical_json(_envelope(args, summary)))


def _verify(model, dataset, family, args, trace, reference, est):
    if est is None:
        est = _constants(model, dataset, family, args.radius, args.cap)
    if est is None:
        return {"status": "skipped", "reason": "triple-union model not enumerable under cap"}
    _, grad_term = reference_gradient_term(model, args.radius, family, dataset, reference)
    eta_star = step_size_optimal(est.alpha, est.beta)
    gammas = [contraction_gamma(e, eta_star, est.mu) for e in trace.eta]
    if args.step == "adaptive":
        report = verify_contraction(trace, reference, gammas, trace.eta, grad_term)
    else:
        report = verify_contraction(trace, reference, gammas[0], trace.eta[0], grad_term)
    return {
        "status": "ok" if report.ok else "violations",
        "alpha": est.alpha,
        "beta": est.beta,
        "mu": est.mu,
        "grad_term": grad_term,
        "max_two_gamma": 2 * max(gammas),
        "steps_checked": report.steps_checked,
        "violations": [list(v) for v in report.violations],
        "envelope_violations": [list(v) for v in report.envelope_violations],
        "min_slack": _json_float(report.min_slack),
        "diagnostic_only": bool(2 * max(gammas) >= 1),
    }


def cmd_smrh(args):
    model, dataset = _load_inputs(args)
    family = _family(args)
    try:
        est = analytic_smrh_bounds(model, dataset, family, args.radius, args.cap)
        alpha, beta, method, examined = est.alpha, est.beta, "analytic", est.supports_examined
    except EnumerationBudgetExceeded:
        beta, alpha = empirical_smrh_probe(
            model, dataset, family, args.radius, args.trials, args.seed
        )
        if beta <= 1e-12:
            raise NotIdentifiable(f"sampled curvature quotient {beta:.3e} is not positive")
        method, examined = "empirical (non-certified)", args.trials
    mu = alpha / beta
    eta_star = step_size_optimal(alpha, beta)
    payload = {
        "alpha": alpha,
        "beta": beta,
        "mu": mu,
        "eta_star": eta_star,
        "gamma_at_eta_star": contraction_gamma(eta_star, eta_star, mu),
        "method": method,
        "supports_examined": examined,
    }
    atomic_write_text(args.out, canonical_json(_envelope(args, payload)))


def cmd_project(args):
    model = load_model(args.model)
    v = load_vector(args.vector)
    if v.shape != (model.p,):
        raise CliError(f"vector has {v.shape[0]} entries, model has p={model.p}")
    res = project_bounded(model, args.radius, v)
    payload = {
        "vector": [float(x) for x in res.vector],
        "support": list(res.support),
        "chosen_generator": list(res.chosen_generator),
        "scaled": res.scaled,
    }
    atomic_write_text(args.out, canonical_json(_envelope(args, payload)))


def cmd_check(args):
    model, dataset = _load_inputs(args)
    family = _family(args)
    theta_star = load_vector(args.reference)
    if theta_star.shape != (model.p,):
        raise CliError("reference vector has the wrong dimension")
    decomp = error_decomposition(model, args.radius, family, dataset, theta_star, args.cap)
    payload = decomp.to_dict()
    try:
        est = _constants(model, dataset, family, args.radius, args.cap)
    except NotIdentifiable:
        est = None
    if est is not None:
        eta = step_size_optimal(est.alpha, est.beta)
        gamma = contraction_gamma(eta, eta, est.mu)
        payload["bound_at_eta_star"] = {
            "alpha": est.alpha,
            "beta": est.beta,
            "mu": est.mu,
            "two_gamma": 2 * gamma,
            "limit_terms": statistical_error_bound(decomp, gamma, eta, 0),
        }
    atomic_write_text(args.out, canonical_json(_envelope(args, payload)))


COMMANDS = {
    "gen": cmd_gen,
    "fit": cmd_fit,
    "smrh": cmd_smrh,
    "project": cmd_project,
    "check": cmd_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except CliError as exc:
        _fail("ConfigError", str(exc), exc.code)
    except (ArithmeticError, EnumerationBudgetExceeded) as exc:
        _fail(type(exc).__name__, str(exc), EXIT_NUMERIC)
    except (FormatError, FamilyError, ValueError, OSError) as exc:
        _fail(type(exc).__name__, str(exc), EXIT_CONFIG)
    return 0


if __name__ == "__main__":
    sys.exit(main())
