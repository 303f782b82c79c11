"""Certification and study procedures built on the closed forms and estimators.

Convexity certificates are grid-plus-probe evidence, not formal proofs:
each certificate names the grid, the number of random probes, and the
analytic worst-case points it checked.  The consistency sweep tracks how
fast the relaxed value at a candidate optimum approaches the true value as
the scale shrinks, and the threshold study measures how the convexity
threshold grows with the disturbance budget.

Grid/probe evaluations and per-budget draws are independent and may run
concurrently; minima are tracked with exact comparisons over deterministic
values, so the reported minimum never depends on reduction order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .closed_form import (
    ClosedFormRelaxation,
    hessian_disturbance_bound,
    relax_hessian,
    relax_value,
    sigma_star,
)
from .core import (
    Array,
    CosineSeries,
    CosineTerm,
    EstimatorConfig,
    MeasureFamily,
    MeasureKind,
    ObjectiveKind,
    ObjectiveSpec,
    RelaxationParams,
    as_point,
    eval_objective,
)
from .estimators import concentration_mass, mc_expectation

#: Slack for eigenvalue comparisons from the symmetric eigensolver.
EIG_TOL = 1e-10


class Verdict(Enum):
    CERTIFIED_ON_GRID = "certified_on_grid"
    REFUTED_AT = "refuted_at"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConvexityCertificate:
    """Evidence record for lambda_min(Hessian) >= m_star over sampled points."""

    sigma: float
    grid_spec: tuple
    random_probes: int
    min_eigenvalue_observed: float
    worst_theta: Array
    strong_convexity_modulus_claimed: float
    verdict: Verdict


@dataclass(frozen=True)
class ConsistencyReport:
    """Gap |E(x*, sigma) - f(x*)| per sigma, plus concentration-mass cells."""

    sigma_schedule: tuple
    gaps: tuple
    epsilon_delta_table: tuple  # rows (delta, sigma, mass_mean, mass_std_error)

    def __post_init__(self):
        if len(self.sigma_schedule) != len(self.gaps):
            raise ValueError("sigma_schedule and gaps must align")


@dataclass(frozen=True)
class ThresholdStudyRow:
    """One disturbance budget C with threshold statistics over amplitude draws."""

    scale: float
    mean_sigma_star: float
    max_sigma_star: float
    exact_single_frequency: float  # NaN unless the base series has one term


def worst_case_probes(spec: ObjectiveSpec) -> list:
    """Analytic points driving axis-aligned cosine terms to their worst sign.

    For a term a*cos(xi*x_i + psi) on axis i the Hessian contribution is
    minimized where a*cos(...) = -|a|.  When all axis-aligned terms sit on
    distinct coordinates the per-term worst values combine into one joint
    probe, listed first.
    """
    probes = []
    combined = np.zeros(spec.dim)
    used_axes = set()
    disjoint = True
    axis_terms = 0
    for term in spec.cosine.terms:
        nonzero = np.flatnonzero(term.frequency)
        if nonzero.size != 1:
            continue
        axis_terms += 1
        axis = int(nonzero[0])
        xi = float(term.frequency[axis])
        target_angle = math.pi if term.amplitude > 0 else 0.0
        coord = (target_angle - term.phase) / xi
        point = np.zeros(spec.dim)
        point[axis] = coord
        probes.append(point)
        if axis in used_axes:
            disjoint = False
        else:
            used_axes.add(axis)
            combined[axis] = coord
    if axis_terms > 1 and disjoint:
        probes.insert(0, combined)
    return probes


def certify_convexity(
    spec: ObjectiveSpec,
    sigma: float,
    grid: tuple,
    probes: int,
    m_star: float,
    seed: int = 0,
) -> ConvexityCertificate:
    """Scan lambda_min(relax_hessian) over a grid, random probes, and worst-case points.

    ``grid`` is (lo, hi, points_per_axis).  The verdict is CERTIFIED_ON_GRID
    when every sampled point satisfies lambda_min >= m_star (up to the
    eigensolver slack) and REFUTED_AT otherwise, with the first minimizing
    point recorded as ``worst_theta``.
    """
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ValueError("convexity certification requires a quadratic-plus-cosine spec")
    lo, hi, points = float(grid[0]), float(grid[1]), int(grid[2])
    if points < 0 or hi < lo:
        raise ValueError("grid must be (lo, hi, points) with hi >= lo and points >= 0")
    relaxation = ClosedFormRelaxation(spec, sigma)

    candidates = list(worst_case_probes(spec))
    axis = np.linspace(lo, hi, points)
    candidates.extend(
        np.array(node) for node in itertools.product(axis, repeat=spec.dim)
    )
    rng = np.random.default_rng(seed)
    candidates.extend(rng.uniform(lo, hi, size=(int(probes), spec.dim)))

    min_eig = math.inf
    worst = None
    for theta in candidates:
        lam = float(np.linalg.eigvalsh(relax_hessian(relaxation, theta))[0])
        if lam < min_eig:
            min_eig = lam
            worst = np.array(theta)

    if worst is None:
        verdict = Verdict.INCONCLUSIVE
        min_eig = math.nan
        worst = np.full(spec.dim, math.nan)
    elif min_eig < m_star - EIG_TOL:
        verdict = Verdict.REFUTED_AT
    else:
        verdict = Verdict.CERTIFIED_ON_GRID
    return ConvexityCertificate(
        sigma=float(sigma),
        grid_spec=(lo, hi, points),
        random_probes=int(probes),
        min_eigenvalue_observed=min_eig,
        worst_theta=worst,
        strong_convexity_modulus_claimed=float(m_star),
        verdict=verdict,
    )


def consistency_sweep(
    spec: ObjectiveSpec,
    x_star,
    sigma_schedule,
    delta_list,
    cfg: EstimatorConfig,
) -> ConsistencyReport:
    """Gaps |E(x*, sigma) - f(x*)| plus concentration mass per (delta, sigma) cell.

    Gaps use the closed form for the built-in family and Monte Carlo
    otherwise.  f(x*) is evaluated, not assumed minimal; global minimality
    of x* is the caller's claim.
    """
    sigmas = [float(s) for s in sigma_schedule]
    deltas = [float(d) for d in delta_list]
    if not sigmas or not deltas:
        raise ValueError("schedules must be nonempty")
    if any(s <= 0.0 for s in sigmas) or any(d <= 0.0 for d in deltas):
        raise ValueError("schedule entries must be > 0")
    x = as_point(x_star, spec.dim, "x_star")
    f_star = eval_objective(spec, x)

    gaps = []
    for s in sigmas:
        if spec.kind is ObjectiveKind.QUAD_PLUS_COSINE:
            value = relax_value(ClosedFormRelaxation(spec, s), x)
        else:
            family = MeasureFamily(MeasureKind.ISOTROPIC_GAUSSIAN, spec.dim)
            value = mc_expectation(spec, family, RelaxationParams(x, s), cfg).mean
        gaps.append(abs(value - f_star))

    table = []
    for d in deltas:
        for s in sigmas:
            est = concentration_mass(spec, RelaxationParams(x, s), x, d, cfg)
            table.append((d, s, est.mean, est.std_error))
    return ConsistencyReport(
        sigma_schedule=tuple(sigmas), gaps=tuple(gaps), epsilon_delta_table=tuple(table)
    )


def filtering_curve(spec: ObjectiveSpec, sigma_schedule) -> list:
    """Hessian disturbance bound sum_j |a_j| ||xi_j||^2 att_j(sigma) per sigma."""
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ValueError("filtering curve requires a quadratic-plus-cosine spec")
    return [(float(s), hessian_disturbance_bound(spec, float(s))) for s in sigma_schedule]


def stochastic_threshold_study(
    base: CosineSeries,
    amplitude_scales,
    seeds,
    m: float,
) -> list:
    """Convexity threshold statistics under random amplitude budgets.

    For each budget C, amplitude vectors are drawn uniformly on the
    L1-simplex scaled to sum |A_j| = C (the boundary worst case of a
    budget-bounded random disturbance), phases fixed at 0 since the
    threshold is phase-invariant.  Returns one ThresholdStudyRow per C;
    the exact single-frequency column carries the closed-form threshold
    when the base series has exactly one term and NaN otherwise.
    """
    scales = [float(c) for c in amplitude_scales]
    if not scales or any(c <= 0.0 for c in scales):
        raise ValueError("amplitude scales must be positive")
    if any(b >= a for a, b in zip(scales[1:], scales)):
        raise ValueError("amplitude scales must be strictly increasing")
    if not len(base):
        raise ValueError("base cosine series must be nonempty")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be nonempty")
    if float(m) <= 0.0:
        raise ValueError("m must be > 0")

    dim = base.dim
    frequencies = [t.frequency for t in base.terms]

    def spec_with(amplitudes: Array) -> ObjectiveSpec:
        terms = tuple(
            CosineTerm(a, xi, 0.0) for a, xi in zip(amplitudes, frequencies)
        )
        return ObjectiveSpec(
            kind=ObjectiveKind.QUAD_PLUS_COSINE,
            dim=dim,
            quad_strength=m,
            cosine=CosineSeries(terms),
        )

    rows = []
    for scale in scales:
        thresholds = []
        for seed in seeds:
            rng = np.random.default_rng(seed)
            weights = rng.dirichlet(np.ones(len(base)))
            thresholds.append(sigma_star(spec_with(scale * weights)))
        exact = sigma_star(spec_with(np.array([scale]))) if len(base) == 1 else math.nan
        rows.append(
            ThresholdStudyRow(
                scale=scale,
                mean_sigma_star=float(np.mean(thresholds)),
                max_sigma_star=float(np.max(thresholds)),
                exact_single_frequency=exact,
            )
        )
    return rows
