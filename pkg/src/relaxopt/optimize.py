"""Fixed-step gradient descent on the relaxation and graduated (annealed) descent.

The default step is 1/L with L the closed-form Lipschitz constant of the
relaxed gradient at the current scale, which makes the closed-form descent
monotone.  Graduated descent runs one descent per scale in a strictly
decreasing schedule, warm-starting each stage at the previous stage's end
point; sigma = 0 is accepted and means descending on the raw objective.

Stochastic gradient sources draw a fresh estimate each iteration; the
iteration's estimator seed is derived as
``SeedSequence(entropy=source_seed, spawn_key=(iteration,))`` with a global
iteration counter that keeps running across stages, so a single-stage
schedule reproduces a plain descent bit for bit.  A single run is
sequential by definition; multi-start batches are independent given
independent seeds and parallelize trivially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .closed_form import ClosedFormRelaxation, gradient_lipschitz, relax_grad, relax_value
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
from .estimators import derive_seed, mc_expectation, score_gradient, translation_gradient

#: Iterates beyond this radius abort the run as divergent.
DIVERGENCE_RADIUS = 1e6


class DivergenceError(RuntimeError):
    """Raised when an iterate leaves the finite trust region."""


class StepRule(Enum):
    ONE_OVER_L = "one_over_l"
    FIXED = "fixed"


class GradientKind(Enum):
    CLOSED_FORM = "closed_form"
    SCORE = "score"
    TRANSLATION = "translation"


@dataclass(frozen=True)
class GradientSource:
    """Where iteration gradients come from; samples/seed apply to stochastic kinds."""

    kind: GradientKind = GradientKind.CLOSED_FORM
    samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind is not GradientKind.CLOSED_FORM and self.samples < 2:
            raise ValueError("stochastic gradient sources need samples >= 2")


@dataclass(frozen=True)
class DescentConfig:
    max_iters: int
    grad_tol: float
    step_rule: StepRule = StepRule.ONE_OVER_L
    step_size: Optional[float] = None
    gradient_source: GradientSource = GradientSource()

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0.0:
            raise ValueError("grad_tol must be > 0")
        if self.step_rule is StepRule.FIXED:
            if self.step_size is None or not self.step_size > 0.0:
                raise ValueError("fixed step rule requires step_size > 0")


@dataclass(frozen=True)
class AnnealSchedule:
    """Strictly decreasing positive scales with a per-stage iteration budget."""

    sigmas: tuple
    iters_per_stage: int

    def __post_init__(self):
        sigmas = tuple(float(s) for s in self.sigmas)
        object.__setattr__(self, "sigmas", sigmas)
        if not sigmas:
            raise ValueError("schedule must be nonempty")
        if any(s <= 0.0 for s in sigmas):
            raise ValueError("schedule sigmas must be > 0")
        if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
            raise ValueError("schedule sigmas must be strictly decreasing")
        if self.iters_per_stage < 1:
            raise ValueError("iters_per_stage must be >= 1")


class TerminationReason(Enum):
    GRAD_TOL = "grad_tol"
    MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class TracePoint:
    theta: Array
    sigma: float
    value: float
    grad_norm: float


@dataclass(frozen=True)
class Trace:
    points: tuple
    terminated_by: TerminationReason

    def __post_init__(self):
        if not self.points:
            raise ValueError("trace must be nonempty")
        if any(not math.isfinite(p.grad_norm) for p in self.points):
            raise ValueError("trace gradient norms must be finite")

    @property
    def final_theta(self) -> Array:
        return self.points[-1].theta

    def csv_header(self) -> list:
        dim = self.points[0].theta.shape[0]
        names = [f"theta_{i + 1}" for i in range(dim)]
        return ["iter", "stage_sigma", *names, "value", "grad_norm"]

    def csv_rows(self) -> list:
        rows = []
        for k, p in enumerate(self.points):
            rows.append([k, p.sigma, *[float(t) for t in p.theta], p.value, p.grad_norm])
        return rows


def _iteration_gradient(spec, sigma, theta, source, counter):
    """Gradient and recorded value for one iterate under the configured source."""
    if sigma == 0.0:
        grad = eval_objective_grad(spec, theta)
        if source.kind is not GradientKind.CLOSED_FORM:
            raise ValueError("sigma = 0 descent supports only the closed-form source")
        return grad, eval_objective(spec, theta)

    params = RelaxationParams(theta, sigma)
    if source.kind is GradientKind.CLOSED_FORM:
        relaxation = ClosedFormRelaxation(spec, sigma)
        return relax_grad(relaxation, theta), relax_value(relaxation, theta)

    cfg = EstimatorConfig(source.samples, derive_seed(source.seed, counter))
    if source.kind is GradientKind.SCORE:
        family = MeasureFamily(MeasureKind.ISOTROPIC_GAUSSIAN, spec.dim)
        grad = np.asarray(score_gradient(spec, family, params, cfg).mean)
    else:
        grad = np.asarray(translation_gradient(spec, params, cfg).mean)
    if spec.kind is ObjectiveKind.QUAD_PLUS_COSINE:
        value = relax_value(ClosedFormRelaxation(spec, sigma), theta)
    else:
        family = MeasureFamily(MeasureKind.ISOTROPIC_GAUSSIAN, spec.dim)
        value = float(mc_expectation(spec, family, params, cfg).mean)
    return grad, value


def _step_size(spec: ObjectiveSpec, sigma: float, cfg: DescentConfig) -> float:
    if cfg.step_rule is StepRule.FIXED:
        return float(cfg.step_size)
    return 1.0 / gradient_lipschitz(spec, sigma)


def _descend(spec, sigma, theta0, cfg, counter_start):
    theta = as_point(theta0, spec.dim, "theta0")
    eta = _step_size(spec, sigma, cfg)
    source = cfg.gradient_source
    points = []
    reason = TerminationReason.MAX_ITERS
    counter = counter_start
    for k in range(cfg.max_iters + 1):
        grad, value = _iteration_gradient(spec, sigma, theta, source, counter)
        counter += 1
        grad_norm = float(np.linalg.norm(grad))
        points.append(TracePoint(theta.copy(), float(sigma), float(value), grad_norm))
        if grad_norm <= cfg.grad_tol:
            reason = TerminationReason.GRAD_TOL
            break
        if k == cfg.max_iters:
            break
        theta = theta - eta * grad
        if not np.all(np.isfinite(theta)) or float(np.linalg.norm(theta)) > DIVERGENCE_RADIUS:
            raise DivergenceError(
                f"iterate diverged at step {k + 1} (sigma={sigma}, step={eta}): {theta}"
            )
    return points, reason, counter


def gradient_descent(spec: ObjectiveSpec, sigma: float, theta0, cfg: DescentConfig) -> Trace:
    """Fixed-step descent on the relaxation at one scale (sigma = 0: on f itself).

    The trace records every iterate; with the 1/L step rule and exact
    gradients the recorded values are non-increasing.  Deterministic given
    the gradient source seed.
    """
    sigma = float(sigma)
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    points, reason, _ = _descend(spec, sigma, theta0, cfg, counter_start=0)
    return Trace(tuple(points), reason)


def graduated_descent(
    spec: ObjectiveSpec, schedule: AnnealSchedule, theta0, cfg: DescentConfig
) -> Trace:
    """Run one descent per schedule stage, warm-starting theta between stages.

    Stage k uses max_iters = schedule.iters_per_stage and the shared
    gradient-source seed with a continuing iteration counter; a single-stage
    schedule therefore reproduces gradient_descent exactly.
    """
    theta = as_point(theta0, spec.dim, "theta0")
    stage_cfg = DescentConfig(
        max_iters=schedule.iters_per_stage,
        grad_tol=cfg.grad_tol,
        step_rule=cfg.step_rule,
        step_size=cfg.step_size,
        gradient_source=cfg.gradient_source,
    )
    points = []
    reason = TerminationReason.MAX_ITERS
    counter = 0
    for sigma in schedule.sigmas:
        stage_points, reason, counter = _descend(spec, sigma, theta, stage_cfg, counter)
        points.extend(stage_points)
        theta = stage_points[-1].theta
    return Trace(tuple(points), reason)
