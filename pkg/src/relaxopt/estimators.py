"""Monte Carlo machinery: expectations, gradient estimators, concentration mass.

RNG contract
------------
All draws come from PCG64 streams derived from ``EstimatorConfig.seed``:
the seed's ``SeedSequence`` is spawned into one child per sample block of
``BLOCK_SIZE`` rows, blocks are generated independently and concatenated in
block order.  A parallel implementation may fan blocks out to workers as
long as it reduces in the same block order, so serial and parallel runs
agree bit for bit.  Gaussian variates use the inverse-CDF transform
(``scipy.special.ndtri`` applied to uniforms); this choice is load-bearing
for golden files and must not be swapped silently.

Antithetic pairing (Gaussian families only) draws N/2 base normals z and
evaluates the integrand at the mirrored pair (theta + sigma*z,
theta - sigma*z); the recorded values are the pair averages and the
standard error is computed over the N/2 pairs.  Standard errors always use
the unbiased sample variance (divide by N-1).

The dominating-function assumptions behind the gradient identities hold
analytically for the built-in families (polynomial growth against Gaussian
tails; finite support for the Bernoulli case) and are not runtime-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import ndtri

from .core import (
    Array,
    EstimatorConfig,
    MeasureFamily,
    MeasureKind,
    ObjectiveKind,
    ObjectiveSpec,
    RelaxationParams,
    as_point,
    eval_discrete_batch,
    eval_objective_batch,
    eval_objective_grad_batch,
)

#: Samples per RNG substream; fixed because reproducibility depends on it.
BLOCK_SIZE = 8192


def derive_seed(base_seed: int, key: int) -> int:
    """Deterministic 64-bit child seed for stream ``key`` of ``base_seed``."""
    seq = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(key),))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo mean with its per-component standard error."""

    mean: Union[float, Array]
    std_error: Union[float, Array]
    samples: int
    seed: int

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if np.any(np.asarray(self.std_error) < 0.0):
            raise ValueError("std_error must be nonnegative")


def _uniform_draws(seed: int, count: int, dim: int) -> Array:
    """(count, dim) uniforms on (0, 1), one PCG64 substream per block."""
    n_blocks = max(1, math.ceil(count / BLOCK_SIZE))
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    blocks = []
    remaining = count
    for child in children:
        n = min(BLOCK_SIZE, remaining)
        gen = np.random.Generator(np.random.PCG64(child))
        blocks.append(gen.random((n, dim)))
        remaining -= n
    u = np.vstack(blocks)
    # random() yields [0, 1); nudge the measure-zero exact-zero draw off -inf.
    return np.maximum(u, 5e-324)


def _gaussian_draws(params: RelaxationParams, cfg: EstimatorConfig):
    """Samples from N(theta, sigma^2 I): (x, mirrored mate or None, displacement).

    The displacement sigma*z is returned so score factors can use the exact
    +/- pair; the mate is theta - sigma*z.
    """
    n = cfg.samples // 2 if cfg.antithetic else cfg.samples
    z = ndtri(_uniform_draws(cfg.seed, n, params.dim))
    disp = params.sigma * z
    x = params.theta + disp
    if cfg.antithetic:
        return x, params.theta - disp, disp
    return x, None, disp


def _bernoulli_draws(theta: Array, cfg: EstimatorConfig) -> Array:
    if cfg.antithetic:
        raise ValueError("antithetic pairing is defined only for the Gaussian family")
    u = _uniform_draws(cfg.seed, cfg.samples, theta.shape[0])
    return (u < theta).astype(float)


def _bernoulli_theta(params, dim: int) -> Array:
    theta = as_point(params, dim, "bernoulli theta")
    if np.any(theta <= 0.0) or np.any(theta >= 1.0):
        raise ValueError("Bernoulli parameters must lie strictly inside (0, 1)")
    return theta


def _scalar_estimate(values: Array, cfg: EstimatorConfig) -> McEstimate:
    n = values.shape[0]
    return McEstimate(
        mean=float(values.mean()),
        std_error=float(values.std(ddof=1) / math.sqrt(n)),
        samples=cfg.samples,
        seed=cfg.seed,
    )


def _vector_estimate(rows: Array, cfg: EstimatorConfig) -> McEstimate:
    n = rows.shape[0]
    return McEstimate(
        mean=rows.mean(axis=0),
        std_error=rows.std(axis=0, ddof=1) / math.sqrt(n),
        samples=cfg.samples,
        seed=cfg.seed,
    )


def _check_pairing(spec: ObjectiveSpec, family: MeasureFamily):
    if family.dim != spec.dim:
        raise ValueError(f"family dimension {family.dim} != spec dimension {spec.dim}")
    if family.kind is MeasureKind.ISOTROPIC_GAUSSIAN:
        if spec.kind is ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
            raise ValueError("Gaussian family pairs with a continuous objective")
    else:
        if spec.kind is not ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
            raise ValueError("Bernoulli family pairs with a discrete objective")


def mc_expectation(
    spec: ObjectiveSpec,
    family: MeasureFamily,
    params,
    cfg: EstimatorConfig,
) -> McEstimate:
    """Estimate E[f] under the parameterized measure.

    ``params`` is a RelaxationParams for the Gaussian family or a vector in
    (0,1)^n for the product-Bernoulli family.  Deterministic given the seed.
    """
    _check_pairing(spec, family)
    if family.kind is MeasureKind.ISOTROPIC_GAUSSIAN:
        if not isinstance(params, RelaxationParams):
            raise TypeError("Gaussian family requires RelaxationParams")
        if params.dim != spec.dim:
            raise ValueError("params dimension mismatch")
        x, mate, _ = _gaussian_draws(params, cfg)
        values = eval_objective_batch(spec, x)
        if mate is not None:
            values = 0.5 * (values + eval_objective_batch(spec, mate))
    else:
        theta = _bernoulli_theta(params, spec.dim)
        values = eval_discrete_batch(spec, _bernoulli_draws(theta, cfg))
    return _scalar_estimate(values, cfg)


def score_gradient(
    spec: ObjectiveSpec,
    family: MeasureFamily,
    params,
    cfg: EstimatorConfig,
) -> McEstimate:
    """Log-likelihood-trick gradient: mean of f(x) * grad_theta ln k_theta(x).

    Gaussian score: (x - theta) / sigma^2.  Bernoulli score per coordinate:
    x/theta - (1-x)/(1-theta).
    """
    _check_pairing(spec, family)
    if family.kind is MeasureKind.ISOTROPIC_GAUSSIAN:
        if not isinstance(params, RelaxationParams):
            raise TypeError("Gaussian family requires RelaxationParams")
        if params.dim != spec.dim:
            raise ValueError("params dimension mismatch")
        x, mate, disp = _gaussian_draws(params, cfg)
        inv_var = 1.0 / (params.sigma * params.sigma)
        rows = eval_objective_batch(spec, x)[:, None] * disp * inv_var
        if mate is not None:
            mate_rows = eval_objective_batch(spec, mate)[:, None] * -disp * inv_var
            rows = 0.5 * (rows + mate_rows)
    else:
        theta = _bernoulli_theta(params, spec.dim)
        x = _bernoulli_draws(theta, cfg)
        score = x / theta - (1.0 - x) / (1.0 - theta)
        rows = eval_discrete_batch(spec, x)[:, None] * score
    return _vector_estimate(rows, cfg)


def translation_gradient(
    spec: ObjectiveSpec,
    params: RelaxationParams,
    cfg: EstimatorConfig,
) -> McEstimate:
    """Translation-family gradient: mean of grad f(x) with x ~ N(theta, sigma^2 I)."""
    if params.dim != spec.dim:
        raise ValueError("params dimension mismatch")
    x, mate, _ = _gaussian_draws(params, cfg)
    rows = eval_objective_grad_batch(spec, x)
    if mate is not None:
        rows = 0.5 * (rows + eval_objective_grad_batch(spec, mate))
    return _vector_estimate(rows, cfg)


def concentration_mass(
    spec: ObjectiveSpec,
    params: RelaxationParams,
    center,
    delta: float,
    cfg: EstimatorConfig,
) -> McEstimate:
    """Estimate the integral of max{|f|, 1} outside the delta-ball at ``center``.

    This is the quantity whose smallness defines concentration at a point;
    it vanishes as the measure collapses onto the ball.
    """
    if params.dim != spec.dim:
        raise ValueError("params dimension mismatch")
    c = as_point(center, spec.dim, "center")
    delta = float(delta)
    if delta <= 0.0:
        raise ValueError("delta must be > 0")

    def cell(points: Array) -> Array:
        outside = np.linalg.norm(points - c, axis=1) > delta
        weight = np.maximum(np.abs(eval_objective_batch(spec, points)), 1.0)
        return outside * weight

    x, mate, _ = _gaussian_draws(params, cfg)
    values = cell(x)
    if mate is not None:
        values = 0.5 * (values + cell(mate))
    return _scalar_estimate(values, cfg)


def finite_difference_grad(g: Callable[[Array], float], theta, h: float) -> Array:
    """Central-difference gradient (g(t+h e_i) - g(t-h e_i)) / (2h) per component."""
    t = np.asarray(theta, dtype=float)
    if float(h) <= 0.0:
        raise ValueError("h must be > 0")
    out = np.zeros_like(t)
    for i in range(t.shape[0]):
        step = np.zeros_like(t)
        step[i] = h
        out[i] = (float(g(t + step)) - float(g(t - step))) / (2.0 * h)
    return out
