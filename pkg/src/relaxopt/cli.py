"""Command-line front end: experiment orchestration and data emission.

Each run takes a single JSON config document plus ``--seed`` / ``--out``
overrides.  Numeric output is CSV with round-trip-exact decimal floats and
a ``#``-prefixed metadata block (command, seed, versions, config echo);
structured results (convexity certificates) are JSON.  Report commands also
render a PNG figure next to the output file unless ``--no-figure`` is set.

Exit codes: 0 success, 1 numeric failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    certify_convexity,
    consistency_sweep,
    filtering_curve,
    stochastic_threshold_study,
)
from .closed_form import ClosedFormRelaxation, relax_grad, relax_value, sigma_star
from .core import (
    Array,
    EstimatorConfig,
    MeasureFamily,
    MeasureKind,
    ObjectiveKind,
    ObjectiveSpec,
    RelaxationParams,
    as_point,
    eval_objective,
    eval_objective_grad,
)
from .estimators import (
    derive_seed,
    finite_difference_grad,
    mc_expectation,
    score_gradient,
    translation_gradient,
)
from .optimize import (
    AnnealSchedule,
    DescentConfig,
    DivergenceError,
    GradientKind,
    GradientSource,
    StepRule,
    gradient_descent,
    graduated_descent,
)

#: Arrows shorter than this are emitted as exact zeros (stationary points).
ZERO_ARROW_TOL = 1e-8


class ConfigError(Exception):
    """Raised for unusable run configurations; maps to exit code 2."""


def flow_direction(spec: ObjectiveSpec, theta, which: str, sigma=None) -> Array:
    """Unit negative gradient of f (raw) or of the relaxed value (relaxed).

    Returns the zero vector where the gradient norm is below
    ZERO_ARROW_TOL, so stationary points come out as (0, 0) arrows.
    """
    if which == "raw":
        grad = eval_objective_grad(spec, theta)
    elif which == "relaxed":
        grad = relax_grad(ClosedFormRelaxation(spec, float(sigma)), theta)
    else:
        raise ValueError(f"unknown field kind: {which!r}")
    norm = float(np.linalg.norm(grad))
    if norm <= ZERO_ARROW_TOL:
        return np.zeros(spec.dim)
    return -grad / norm


# -- config plumbing --------------------------------------------------------


def _load_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def _require(doc: dict, dotted: str):
    node = doc
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"missing required field: {dotted}")
        node = node[part]
    return node


def _objective(doc: dict) -> ObjectiveSpec:
    obj = _require(doc, "objective")
    try:
        return ObjectiveSpec.from_config(obj)
    except ValueError as exc:
        msg = str(exc)
        if msg.startswith("missing required field: "):
            field = msg.removeprefix("missing required field: ")
            raise ConfigError(f"missing required field: objective.{field}") from exc
        raise ConfigError(f"invalid objective: {exc}") from exc


def _estimator(doc: dict, run_seed: int) -> EstimatorConfig:
    block = _require(doc, "estimator")
    samples = _require(doc, "estimator.samples")
    return EstimatorConfig(
        samples=samples,
        seed=int(block.get("seed", run_seed)),
        antithetic=bool(block.get("antithetic", False)),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _metadata_lines(command: str, seed: int, doc: dict) -> list:
    echo = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return [
        f"# command: {command}",
        f"# seed: {seed}",
        f"# versions: relaxopt {__version__}; numpy {np.__version__}",
        f"# config: {echo}",
    ]


def _emit_csv(out, command, seed, doc, header, rows, extra_metadata=()):
    buffer = io.StringIO()
    for line in _metadata_lines(command, seed, doc):
        buffer.write(line + "\n")
    for line in extra_metadata:
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buffer.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_json(out, command, seed, doc, payload):
    body = {
        "command": command,
        "seed": seed,
        "versions": f"relaxopt {__version__}; numpy {np.__version__}",
        "config": doc,
        "result": payload,
    }
    text = json.dumps(body, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _figure_path(out) -> Path:
    return Path(out).with_suffix(".png")


def _want_figure(args, out) -> bool:
    return out is not None and not args.no_figure


# -- commands ---------------------------------------------------------------


def cmd_eval(args, doc, seed, out) -> int:
    spec = _objective(doc)
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ConfigError("eval requires a quad_plus_cosine objective")
    theta = as_point(_require(doc, "theta"), spec.dim, "theta")
    sigma = float(_require(doc, "sigma"))
    cfg = _estimator(doc, seed)
    relaxation = ClosedFormRelaxation(spec, sigma)

    f_theta = eval_objective(spec, theta)
    closed = relax_value(relaxation, theta)
    family = MeasureFamily(MeasureKind.ISOTROPIC_GAUSSIAN, spec.dim)
    mc = mc_expectation(spec, family, RelaxationParams(theta, sigma), cfg)
    header = ["f_theta", "closed_form", "mc_mean", "mc_std_error", "abs_diff", "four_std_errors"]
    row = [f_theta, closed, mc.mean, mc.std_error, abs(closed - mc.mean), 4.0 * mc.std_error]
    _emit_csv(out, "eval", seed, doc, header, [row])
    return 0


def cmd_grad(args, doc, seed, out) -> int:
    spec = _objective(doc)
    if spec.kind is ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
        return _grad_discrete(doc, seed, out, spec)
    theta = as_point(_require(doc, "theta"), spec.dim, "theta")
    sigma = float(_require(doc, "sigma"))
    cfg = _estimator(doc, seed)
    h = float(doc.get("fd_step", 1e-4))
    relaxation = ClosedFormRelaxation(spec, sigma)
    params = RelaxationParams(theta, sigma)
    family = MeasureFamily(MeasureKind.ISOTROPIC_GAUSSIAN, spec.dim)

    closed = relax_grad(relaxation, theta)
    score_cfg = EstimatorConfig(cfg.samples, derive_seed(cfg.seed, 0), cfg.antithetic)
    trans_cfg = EstimatorConfig(cfg.samples, derive_seed(cfg.seed, 1), cfg.antithetic)
    score = score_gradient(spec, family, params, score_cfg)
    trans = translation_gradient(spec, params, trans_cfg)
    fd = finite_difference_grad(lambda t: relax_value(relaxation, t), theta, h)

    header = [
        "component",
        "closed_form",
        "score_mean",
        "score_std_error",
        "translation_mean",
        "translation_std_error",
        "finite_difference",
        "score_delta",
        "translation_delta",
        "fd_delta",
    ]
    rows = []
    for i in range(spec.dim):
        rows.append(
            [
                i + 1,
                closed[i],
                score.mean[i],
                score.std_error[i],
                trans.mean[i],
                trans.std_error[i],
                fd[i],
                score.mean[i] - closed[i],
                trans.mean[i] - closed[i],
                fd[i] - closed[i],
            ]
        )
    _emit_csv(out, "grad", seed, doc, header, rows)
    return 0


def _grad_discrete(doc, seed, out, spec) -> int:
    theta = as_point(_require(doc, "theta"), spec.dim, "theta")
    cfg = _estimator(doc, seed)
    family = MeasureFamily(MeasureKind.PRODUCT_BERNOULLI, spec.dim)
    score = score_gradient(spec, family, theta, cfg)
    header = ["component", "exact", "score_mean", "score_std_error", "score_delta"]
    rows = [
        [i + 1, -1.0, score.mean[i], score.std_error[i], score.mean[i] + 1.0]
        for i in range(spec.dim)
    ]
    _emit_csv(out, "grad", seed, doc, header, rows)
    return 0


def cmd_sigma_star(args, doc, seed, out) -> int:
    spec = _objective(doc)
    threshold = sigma_star(spec)
    schedule = doc.get("sigma_schedule")
    if schedule is None:
        schedule = np.linspace(0.0, max(1.0, 2.0 * threshold), 41).tolist()
    curve = filtering_curve(spec, schedule)
    header = ["sigma", "hessian_disturbance_bound"]
    _emit_csv(
        out,
        "sigma-star",
        seed,
        doc,
        header,
        curve,
        extra_metadata=[f"# sigma_star: {_fmt(threshold)}"],
    )
    if _want_figure(args, out):
        from . import figures

        figures.render_filtering_curve(
            [c[0] for c in curve],
            [c[1] for c in curve],
            threshold,
            2.0 * spec.quad_strength,
            _figure_path(out),
        )
    return 0


def cmd_certify(args, doc, seed, out) -> int:
    spec = _objective(doc)
    sigma = float(_require(doc, "sigma"))
    grid = (
        float(_require(doc, "grid.lo")),
        float(_require(doc, "grid.hi")),
        int(_require(doc, "grid.points")),
    )
    probes = int(doc.get("probes", 100))
    m_star = float(doc.get("m_star", 0.0))
    cert = certify_convexity(spec, sigma, grid, probes, m_star, seed=seed)
    payload = {
        "sigma": cert.sigma,
        "grid": list(cert.grid_spec),
        "random_probes": cert.random_probes,
        "m_star": cert.strong_convexity_modulus_claimed,
        "min_eigenvalue_observed": cert.min_eigenvalue_observed,
        "worst_theta": [float(t) for t in cert.worst_theta],
        "verdict": cert.verdict.value,
    }
    _emit_json(out, "certify", seed, doc, payload)
    return 0


def cmd_consistency(args, doc, seed, out) -> int:
    spec = _objective(doc)
    x_star = as_point(_require(doc, "x_star"), spec.dim, "x_star")
    sigma_schedule = _require(doc, "sigma_schedule")
    delta_list = _require(doc, "delta_list")
    cfg = _estimator(doc, seed)
    report = consistency_sweep(spec, x_star, sigma_schedule, delta_list, cfg)
    header = ["record", "sigma", "delta", "value", "std_error"]
    rows = [
        ["gap", s, None, g, None]
        for s, g in zip(report.sigma_schedule, report.gaps)
    ]
    rows.extend(
        ["concentration", s, d, mass, se] for d, s, mass, se in report.epsilon_delta_table
    )
    _emit_csv(out, "consistency", seed, doc, header, rows)
    if _want_figure(args, out):
        from . import figures

        figures.render_consistency(
            report.sigma_schedule, report.gaps, report.epsilon_delta_table, _figure_path(out)
        )
    return 0


def cmd_threshold_study(args, doc, seed, out) -> int:
    spec = _objective(doc)
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE or not len(spec.cosine):
        raise ConfigError("threshold-study needs a quad_plus_cosine objective with cosine terms")
    scales = _require(doc, "amplitude_scales")
    study_seeds = doc.get("seeds")
    if study_seeds is None:
        draws = int(doc.get("draws", 16))
        study_seeds = [derive_seed(seed, k) for k in range(draws)]
    rows = stochastic_threshold_study(spec.cosine, scales, study_seeds, spec.quad_strength)
    header = ["amplitude_scale", "mean_sigma_star", "max_sigma_star", "exact_single_frequency"]
    table = [
        [r.scale, r.mean_sigma_star, r.max_sigma_star, r.exact_single_frequency] for r in rows
    ]
    _emit_csv(out, "threshold-study", seed, doc, header, table)
    if _want_figure(args, out):
        from . import figures

        figures.render_threshold_study(
            [r.scale for r in rows],
            [r.mean_sigma_star for r in rows],
            [r.max_sigma_star for r in rows],
            np.array([r.exact_single_frequency for r in rows]),
            _figure_path(out),
        )
    return 0


def _gradient_source(doc: dict, seed: int) -> GradientSource:
    block = doc.get("gradient_source", {"kind": "closed_form"})
    try:
        kind = GradientKind(_require({"gradient_source": block}, "gradient_source.kind"))
    except ValueError as exc:
        raise ConfigError(f"unknown gradient source kind: {block.get('kind')!r}") from exc
    return GradientSource(
        kind=kind,
        samples=int(block.get("samples", 0)),
        seed=int(block.get("seed", seed)),
    )


def cmd_optimize(args, doc, seed, out) -> int:
    spec = _objective(doc)
    theta0 = as_point(_require(doc, "theta0"), spec.dim, "theta0")
    rule_name = doc.get("step_rule", "one_over_l")
    try:
        rule = StepRule(rule_name)
    except ValueError as exc:
        raise ConfigError(f"unknown step rule: {rule_name!r}") from exc
    source = _gradient_source(doc, seed)

    if "sigma_schedule" in doc:
        schedule = AnnealSchedule(
            sigmas=tuple(float(s) for s in doc["sigma_schedule"]),
            iters_per_stage=int(_require(doc, "iters_per_stage")),
        )
        cfg = DescentConfig(
            max_iters=schedule.iters_per_stage,
            grad_tol=float(doc.get("grad_tol", 1e-8)),
            step_rule=rule,
            step_size=doc.get("step_size"),
            gradient_source=source,
        )
        trace = graduated_descent(spec, schedule, theta0, cfg)
    else:
        sigma = float(_require(doc, "sigma"))
        cfg = DescentConfig(
            max_iters=int(_require(doc, "max_iters")),
            grad_tol=float(doc.get("grad_tol", 1e-8)),
            step_rule=rule,
            step_size=doc.get("step_size"),
            gradient_source=source,
        )
        trace = gradient_descent(spec, sigma, theta0, cfg)

    _emit_csv(out, "optimize", seed, doc, trace.csv_header(), trace.csv_rows())
    if _want_figure(args, out):
        from . import figures

        figures.render_trace(
            [p.value for p in trace.points],
            [p.grad_norm for p in trace.points],
            _figure_path(out),
        )
    return 0


def cmd_flowfield(args, doc, seed, out) -> int:
    spec = _objective(doc)
    if spec.dim != 2:
        raise ConfigError("flowfield requires a 2-dimensional objective")
    which = _require(doc, "which")
    if which not in ("raw", "relaxed"):
        raise ConfigError(f"which must be 'raw' or 'relaxed', got {which!r}")
    sigma = None
    if which == "relaxed":
        sigma = float(_require(doc, "sigma"))
    lo = float(_require(doc, "grid.lo"))
    hi = float(_require(doc, "grid.hi"))
    points = int(_require(doc, "grid.points"))
    axis = np.linspace(lo, hi, points)

    rows = []
    for t2 in axis:
        for t1 in axis:
            arrow = flow_direction(spec, np.array([t1, t2]), which, sigma)
            rows.append([t1, t2, arrow[0], arrow[1]])
    header = ["theta_1", "theta_2", "g_1", "g_2"]
    _emit_csv(out, "flowfield", seed, doc, header, rows)
    if _want_figure(args, out):
        from . import figures

        data = np.array([[r[0], r[1], r[2], r[3]] for r in rows])
        title = "raw gradient flow" if which == "raw" else f"relaxed flow (sigma={sigma:g})"
        figures.render_flowfield(
            data[:, 0], data[:, 1], data[:, 2], data[:, 3], _figure_path(out), title
        )
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "grad": cmd_grad,
    "sigma-star": cmd_sigma_star,
    "certify": cmd_certify,
    "consistency": cmd_consistency,
    "threshold-study": cmd_threshold_study,
    "optimize": cmd_optimize,
    "flowfield": cmd_flowfield,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxopt",
        description="Evaluate, certify, and optimize Gaussian relaxations of benchmark objectives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "eval": "objective value vs closed-form and Monte Carlo relaxation values",
        "grad": "compare closed-form / score / translation / finite-difference gradients",
        "sigma-star": "convexity threshold and attenuation curve",
        "certify": "grid-plus-probe convexity certificate",
        "consistency": "approximation gaps and concentration masses over a sigma schedule",
        "threshold-study": "threshold scaling under random amplitude budgets",
        "optimize": "fixed-step or graduated descent on the relaxation",
        "flowfield": "normalized negative-gradient field on a 2-D grid",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="path to the JSON run config")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None, help="override the config output path")
        sp.add_argument(
            "--no-figure", action="store_true", help="skip PNG rendering next to the output"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _load_document(args.config)
        if args.seed is not None:
            seed = int(args.seed)
        elif "seed" in doc:
            seed = int(doc["seed"])
        else:
            raise ConfigError("missing required field: seed")
        out = args.out if args.out is not None else doc.get("out")
        return COMMANDS[args.command](args, doc, seed, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
