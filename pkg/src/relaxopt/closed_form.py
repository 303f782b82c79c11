"""Exact formulas for the isotropic-Gaussian relaxation of the cosine family.

For x ~ N(theta, sigma^2 I) the expectation of the quadratic-plus-cosine
objective has the closed form

    E(theta, sigma) = m*(n*sigma^2 + ||theta||^2)
                      - sum_j a_j cos(<xi_j, theta> + psi_j) * exp(-sigma^2 ||xi_j||^2 / 2),

since the Gaussian characteristic function attenuates each frequency xi by
exp(-sigma^2 ||xi||^2 / 2).  Everything here (value, gradient, Hessian,
convexity threshold, Lipschitz constant) follows from that identity; all
functions are pure and safe for parallel grid sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Array, ObjectiveKind, ObjectiveSpec, as_point

#: |sigma_hi - sigma_lo| bisection stopping width for the threshold solver.
SIGMA_STAR_TOL = 1e-12


@dataclass(frozen=True)
class ClosedFormRelaxation:
    """A quadratic-plus-cosine spec paired with a Gaussian scale sigma."""

    spec: ObjectiveSpec
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
            raise ValueError("closed forms exist only for the quadratic-plus-cosine family")
        if not math.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ValueError("sigma must be finite and > 0")


def attenuation_factors(spec: ObjectiveSpec, sigma: float) -> Array:
    """Per-term damping exp(-sigma^2 ||xi_j||^2 / 2) as an array."""
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ValueError("attenuation requires a quadratic-plus-cosine spec")
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    norms2 = spec.cosine.frequency_norms() ** 2
    return np.exp(-0.5 * sigma * sigma * norms2)


def attenuation(spec: ObjectiveSpec, term_index: int, sigma: float) -> float:
    """Damping factor of cosine term ``term_index`` at scale sigma; in (0, 1]."""
    factors = attenuation_factors(spec, sigma)
    if not 0 <= term_index < len(factors):
        raise IndexError(f"term index {term_index} out of range for {len(factors)} terms")
    return float(factors[term_index])


def relax_value(r: ClosedFormRelaxation, theta) -> float:
    """Expected objective value under N(theta, sigma^2 I)."""
    spec = r.spec
    t = as_point(theta, spec.dim, "theta")
    value = spec.quad_strength * (spec.dim * r.sigma**2 + float(t @ t))
    if len(spec.cosine):
        u = spec.cosine.frequency_matrix() @ t + spec.cosine.phases()
        value -= float(np.cos(u) @ (spec.cosine.amplitudes() * attenuation_factors(spec, r.sigma)))
    return float(value)


def relax_grad(r: ClosedFormRelaxation, theta) -> Array:
    """Gradient of the relaxed value in theta."""
    spec = r.spec
    t = as_point(theta, spec.dim, "theta")
    grad = 2.0 * spec.quad_strength * t
    if len(spec.cosine):
        Xi = spec.cosine.frequency_matrix()
        u = Xi @ t + spec.cosine.phases()
        weights = spec.cosine.amplitudes() * attenuation_factors(spec, r.sigma)
        grad = grad + (np.sin(u) * weights) @ Xi
    return grad


def relax_hessian(r: ClosedFormRelaxation, theta) -> Array:
    """Dense Hessian 2m*I + sum_j a_j cos(u_j) att_j xi_j xi_j^T."""
    spec = r.spec
    t = as_point(theta, spec.dim, "theta")
    H = 2.0 * spec.quad_strength * np.eye(spec.dim)
    if len(spec.cosine):
        Xi = spec.cosine.frequency_matrix()
        u = Xi @ t + spec.cosine.phases()
        weights = spec.cosine.amplitudes() * attenuation_factors(spec, r.sigma) * np.cos(u)
        H = H + (Xi.T * weights) @ Xi
    return H


def hessian_disturbance_bound(spec: ObjectiveSpec, sigma: float) -> float:
    """Uniform bound sum_j |a_j| ||xi_j||^2 att_j(sigma) on the cosine part of the Hessian."""
    weights = np.abs(spec.cosine.amplitudes()) * spec.cosine.frequency_norms() ** 2
    return float(weights @ attenuation_factors(spec, sigma))


def _is_axis_aligned_disjoint(spec: ObjectiveSpec) -> bool:
    """True when every frequency has one nonzero entry and no coordinate repeats."""
    seen = set()
    for term in spec.cosine.terms:
        nonzero = np.flatnonzero(term.frequency)
        if nonzero.size != 1:
            return False
        axis = int(nonzero[0])
        if axis in seen:
            return False
        seen.add(axis)
    return True


def sigma_star(spec: ObjectiveSpec) -> float:
    """Smallest scale beyond which the relaxation is certifiably strictly convex.

    Sufficient criterion: the Hessian's minimum eigenvalue is at least
    2m - sum_j |a_j| ||xi_j||^2 att_j(sigma), which is positive once the
    disturbance bound drops below 2m.  For axis-aligned terms on disjoint
    coordinates the Hessian is diagonal and the per-frequency closed form

        sigma_j^2 = (2 / ||xi_j||^2) * ln(|a_j| ||xi_j||^2 / (2m))

    is exact; otherwise the aggregate bound is solved by bisection.
    Thresholds that come out negative are clamped to 0 (already convex).
    """
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ValueError("sigma_star requires a quadratic-plus-cosine spec")
    m = spec.quad_strength
    if m <= 0.0:
        raise ValueError("sigma_star requires quad_strength > 0")
    if not len(spec.cosine):
        return 0.0

    if _is_axis_aligned_disjoint(spec):
        best = 0.0
        for term in spec.cosine.terms:
            w = abs(term.amplitude) * term.frequency_norm**2
            if w > 2.0 * m:
                s2 = (2.0 / term.frequency_norm**2) * math.log(w / (2.0 * m))
                best = max(best, s2)
        return math.sqrt(best)

    if hessian_disturbance_bound(spec, 0.0) <= 2.0 * m:
        return 0.0
    hi = 1.0
    while hessian_disturbance_bound(spec, hi) >= 2.0 * m:
        hi *= 2.0
        if hi > 1e12:
            raise FloatingPointError("threshold bracket expansion failed")
    lo = 0.0
    while hi - lo > SIGMA_STAR_TOL:
        mid = 0.5 * (lo + hi)
        if hessian_disturbance_bound(spec, mid) >= 2.0 * m:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gradient_lipschitz(spec: ObjectiveSpec, sigma: float) -> float:
    """Lipschitz constant 2m + sum_j |a_j| ||xi_j||^2 att_j(sigma) for the relaxed gradient.

    sigma = 0 gives the constant for the raw objective gradient itself.
    """
    if spec.kind is not ObjectiveKind.QUAD_PLUS_COSINE:
        raise ValueError("the Hessian bound requires a quadratic-plus-cosine spec")
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    return 2.0 * spec.quad_strength + hessian_disturbance_bound(spec, sigma)


def lipschitz_grad_constant(r: ClosedFormRelaxation) -> float:
    """Supremum bound on the relaxed Hessian's spectral norm; valid for relax_grad."""
    return gradient_lipschitz(r.spec, r.sigma)
