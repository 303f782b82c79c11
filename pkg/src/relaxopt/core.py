"""Objective specifications and shared domain types.

The continuous objective family is a quadratic bowl superimposed with a
finite cosine series,

    f(x) = m * ||x||^2 - sum_j a_j * cos(<xi_j, x> + psi_j),

which covers the Rastrigin benchmark (axis-aligned frequencies) and its
general-frequency extensions.  A pseudo-Boolean counting objective and a
black-box callable escape hatch round out the family.  All types here are
immutable after construction and safe to share across workers; every
evaluation operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

TWO_PI = 2.0 * math.pi


class ObjectiveKind(Enum):
    QUAD_PLUS_COSINE = "quad_plus_cosine"
    DISCRETE_PSEUDO_BOOLEAN = "discrete_pseudo_boolean"
    BLACK_BOX = "black_box"


class MeasureKind(Enum):
    ISOTROPIC_GAUSSIAN = "isotropic_gaussian"
    PRODUCT_BERNOULLI = "product_bernoulli"


def as_point(x, dim: int, name: str = "x") -> Array:
    """Coerce to a finite 1-D float vector of length ``dim`` or raise."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] != dim:
        raise ValueError(f"{name} must be a vector of dimension {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def _freeze(a: Array) -> Array:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CosineTerm:
    """One disturbance component ``a * cos(<xi, x> + psi)``."""

    amplitude: float
    frequency: Array
    phase: float = 0.0

    def __post_init__(self):
        freq = np.asarray(self.frequency, dtype=float)
        if freq.ndim == 0:
            freq = freq.reshape(1)
        object.__setattr__(self, "frequency", _freeze(freq))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "phase", float(self.phase))
        if self.frequency.ndim != 1:
            raise ValueError("frequency must be a 1-D vector")
        if not np.all(np.isfinite(self.frequency)):
            raise ValueError("frequency contains non-finite entries")
        if not (math.isfinite(self.amplitude) and math.isfinite(self.phase)):
            raise ValueError("amplitude and phase must be finite")
        if float(np.linalg.norm(self.frequency)) == 0.0:
            raise ValueError("frequency must have nonzero norm")

    @property
    def frequency_norm(self) -> float:
        return float(np.linalg.norm(self.frequency))


@dataclass(frozen=True)
class CosineSeries:
    """Finite cosine disturbance ``sum_j a_j cos(<xi_j, x> + psi_j)``.

    Every frequency vector must be nonzero (the disturbance spectrum stays
    away from the origin), and all must share one dimension.
    """

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if not isinstance(t, CosineTerm):
                raise TypeError("terms must be CosineTerm instances")
        dims = {t.frequency.shape[0] for t in self.terms}
        if len(dims) > 1:
            raise ValueError("all frequency vectors must share one dimension")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> Optional[int]:
        return self.terms[0].frequency.shape[0] if self.terms else None

    def amplitudes(self) -> Array:
        return np.array([t.amplitude for t in self.terms], dtype=float)

    def phases(self) -> Array:
        return np.array([t.phase for t in self.terms], dtype=float)

    def frequency_matrix(self) -> Array:
        """Stack frequencies as a (n_terms, dim) matrix."""
        if not self.terms:
            return np.zeros((0, 0))
        return np.stack([t.frequency for t in self.terms])

    def frequency_norms(self) -> Array:
        return np.array([t.frequency_norm for t in self.terms], dtype=float)

    @staticmethod
    def empty() -> "CosineSeries":
        return CosineSeries(())


@dataclass(frozen=True)
class ObjectiveSpec:
    """Structured description of a benchmark objective.

    ``quad_strength`` is the coefficient m of the ``m * ||x||^2`` term; the
    smooth part is therefore 2m-strongly convex.  The cosine series enters
    with a minus sign; a disturbance that should be added is expressed by
    negating amplitudes.
    """

    kind: ObjectiveKind
    dim: int
    quad_strength: float = 0.0
    cosine: CosineSeries = CosineSeries(())
    blackbox_eval: Optional[Callable[[Array], float]] = None
    blackbox_grad: Optional[Callable[[Array], Array]] = None

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "quad_strength", float(self.quad_strength))
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not math.isfinite(self.quad_strength) or self.quad_strength < 0.0:
            raise ValueError("quad_strength must be finite and >= 0")
        if self.kind is ObjectiveKind.QUAD_PLUS_COSINE:
            if len(self.cosine) and self.cosine.dim != self.dim:
                raise ValueError(
                    f"cosine frequencies have dimension {self.cosine.dim}, expected {self.dim}"
                )
        elif self.kind is ObjectiveKind.BLACK_BOX:
            if self.blackbox_eval is None:
                raise ValueError("black-box objective requires blackbox_eval")
            if len(self.cosine):
                raise ValueError("black-box objective takes no cosine series")
        elif self.kind is ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
            if len(self.cosine):
                raise ValueError("discrete objective takes no cosine series")

    # -- serialization ----------------------------------------------------

    def to_config(self) -> dict:
        """Serialize to the JSON-compatible config document form."""
        if self.kind is ObjectiveKind.BLACK_BOX:
            raise ValueError("black-box evaluation contracts are not serializable")
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "quad_strength": self.quad_strength,
            "cosine": [
                {"a": t.amplitude, "xi": list(map(float, t.frequency)), "psi": t.phase}
                for t in self.cosine.terms
            ],
        }

    @staticmethod
    def from_config(doc: dict) -> "ObjectiveSpec":
        """Parse the config document form; raises ValueError naming missing fields."""
        if not isinstance(doc, dict):
            raise ValueError("objective must be a mapping")
        for key in ("kind", "dim"):
            if key not in doc:
                raise ValueError(f"missing required field: {key}")
        try:
            kind = ObjectiveKind(doc["kind"])
        except ValueError:
            raise ValueError(f"unknown objective kind: {doc['kind']!r}") from None
        if kind is ObjectiveKind.BLACK_BOX:
            raise ValueError("black-box objectives cannot be built from a config document")
        terms = []
        for j, entry in enumerate(doc.get("cosine", [])):
            for key in ("a", "xi"):
                if key not in entry:
                    raise ValueError(f"missing required field: cosine[{j}].{key}")
            terms.append(
                CosineTerm(entry["a"], np.asarray(entry["xi"], dtype=float), entry.get("psi", 0.0))
            )
        return ObjectiveSpec(
            kind=kind,
            dim=doc["dim"],
            quad_strength=doc.get("quad_strength", 0.0),
            cosine=CosineSeries(tuple(terms)),
        )


@dataclass(frozen=True)
class RelaxationParams:
    """Search point of the relaxation: translation theta and scale sigma > 0."""

    theta: Array
    sigma: float

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim == 0:
            theta = theta.reshape(1)
        object.__setattr__(self, "theta", _freeze(theta))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.theta.ndim != 1 or not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be a finite 1-D vector")
        if not math.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ValueError("sigma must be finite and > 0")

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class MeasureFamily:
    """Family of base measures: isotropic Gaussian on R^n or product Bernoulli on {0,1}^n."""

    kind: MeasureKind
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.dim))
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass(frozen=True)
class EstimatorConfig:
    """Monte Carlo settings: sample count, RNG seed, antithetic switch."""

    samples: int
    seed: int
    antithetic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.antithetic and self.samples % 2 != 0:
            raise ValueError("antithetic pairing requires an even sample count")


# -- evaluation ------------------------------------------------------------


def eval_objective_batch(spec: ObjectiveSpec, X: Array) -> Array:
    """Evaluate f on the rows of X (shape (N, dim)); vectorized for the built-in family."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"X must have shape (N, {spec.dim}), got {X.shape}")
    if spec.kind is ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
        raise ValueError("discrete objective has no continuous evaluation; use eval_discrete")
    if spec.kind is ObjectiveKind.BLACK_BOX:
        return np.array([float(spec.blackbox_eval(row)) for row in X])
    values = spec.quad_strength * np.sum(X * X, axis=1)
    if len(spec.cosine):
        U = X @ spec.cosine.frequency_matrix().T + spec.cosine.phases()
        values = values - np.cos(U) @ spec.cosine.amplitudes()
    return values


def eval_objective(spec: ObjectiveSpec, x) -> float:
    """f(x) = m*||x||^2 - sum_j a_j cos(<xi_j, x> + psi_j), or the black-box value."""
    v = as_point(x, spec.dim)
    return float(eval_objective_batch(spec, v[None, :])[0])


def eval_objective_grad_batch(spec: ObjectiveSpec, X: Array) -> Array:
    """Row-wise gradient of f; requires a differentiable spec."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"X must have shape (N, {spec.dim}), got {X.shape}")
    if spec.kind is ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
        raise ValueError("discrete objective has no gradient")
    if spec.kind is ObjectiveKind.BLACK_BOX:
        if spec.blackbox_grad is None:
            raise ValueError("no gradient available for this black-box objective")
        return np.stack([np.asarray(spec.blackbox_grad(row), dtype=float) for row in X])
    grads = 2.0 * spec.quad_strength * X
    if len(spec.cosine):
        Xi = spec.cosine.frequency_matrix()
        U = X @ Xi.T + spec.cosine.phases()
        grads = grads + (np.sin(U) * spec.cosine.amplitudes()) @ Xi
    return grads


def eval_objective_grad(spec: ObjectiveSpec, x) -> Array:
    """grad f(x) = 2m*x + sum_j a_j sin(<xi_j, x> + psi_j) xi_j."""
    v = as_point(x, spec.dim)
    return eval_objective_grad_batch(spec, v[None, :])[0]


def eval_discrete_batch(spec: ObjectiveSpec, X: Array) -> Array:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"X must have shape (N, {spec.dim}), got {X.shape}")
    if spec.kind is not ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN:
        raise ValueError("eval_discrete requires a discrete pseudo-Boolean spec")
    if not np.all((X == 0.0) | (X == 1.0)):
        raise ValueError("discrete evaluation requires binary inputs")
    return -np.sum(X, axis=1)


def eval_discrete(spec: ObjectiveSpec, x) -> float:
    """Negated bit count -sum_i x_i on {0,1}^n; the optimum is all ones."""
    v = as_point(x, spec.dim)
    return float(eval_discrete_batch(spec, v[None, :])[0])


# -- built-in benchmark constructors ---------------------------------------


def rastrigin(dim: int, amplitude: float = 10.0, frequency: float = TWO_PI) -> ObjectiveSpec:
    """Rastrigin-style spec: unit quadratic plus one axis-aligned cosine per coordinate."""
    terms = []
    for i in range(dim):
        xi = np.zeros(dim)
        xi[i] = frequency
        terms.append(CosineTerm(amplitude, xi, 0.0))
    return ObjectiveSpec(
        kind=ObjectiveKind.QUAD_PLUS_COSINE,
        dim=dim,
        quad_strength=1.0,
        cosine=CosineSeries(tuple(terms)),
    )


def sphere(dim: int, quad_strength: float = 1.0) -> ObjectiveSpec:
    """Pure quadratic m*||x||^2 (empty disturbance)."""
    return ObjectiveSpec(
        kind=ObjectiveKind.QUAD_PLUS_COSINE,
        dim=dim,
        quad_strength=quad_strength,
        cosine=CosineSeries(()),
    )


def onemax(dim: int) -> ObjectiveSpec:
    """Negated-OneMax pseudo-Boolean objective on {0,1}^dim."""
    return ObjectiveSpec(kind=ObjectiveKind.DISCRETE_PSEUDO_BOOLEAN, dim=dim)
