"""Stochastic relaxations of optimization problems.

Build the relaxation of a quadratic-plus-cosine (or discrete / black-box)
objective under a translated-and-scaled base measure, evaluate it in closed
form or by Monte Carlo, compute its gradient three independent ways,
certify convexity above the attenuation threshold, and run graduated
descent over a shrinking-scale schedule.
"""

from .core import (
    CosineSeries,
    CosineTerm,
    EstimatorConfig,
    MeasureFamily,
    MeasureKind,
    ObjectiveKind,
    ObjectiveSpec,
    RelaxationParams,
    eval_discrete,
    eval_objective,
    eval_objective_grad,
    onemax,
    rastrigin,
    sphere,
)
from .closed_form import (
    ClosedFormRelaxation,
    attenuation,
    gradient_lipschitz,
    lipschitz_grad_constant,
    relax_grad,
    relax_hessian,
    relax_value,
    sigma_star,
)
from .estimators import (
    McEstimate,
    concentration_mass,
    finite_difference_grad,
    mc_expectation,
    score_gradient,
    translation_gradient,
)
from .analysis import (
    ConsistencyReport,
    ConvexityCertificate,
    ThresholdStudyRow,
    Verdict,
    certify_convexity,
    consistency_sweep,
    filtering_curve,
    stochastic_threshold_study,
)
from .optimize import (
    AnnealSchedule,
    DescentConfig,
    DivergenceError,
    GradientKind,
    GradientSource,
    StepRule,
    TerminationReason,
    Trace,
    gradient_descent,
    graduated_descent,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "ClosedFormRelaxation",
    "ConsistencyReport",
    "ConvexityCertificate",
    "CosineSeries",
    "CosineTerm",
    "DescentConfig",
    "DivergenceError",
    "EstimatorConfig",
    "GradientKind",
    "GradientSource",
    "McEstimate",
    "MeasureFamily",
    "MeasureKind",
    "ObjectiveKind",
    "ObjectiveSpec",
    "RelaxationParams",
    "StepRule",
    "TerminationReason",
    "ThresholdStudyRow",
    "Trace",
    "Verdict",
    "attenuation",
    "certify_convexity",
    "concentration_mass",
    "consistency_sweep",
    "eval_discrete",
    "eval_objective",
    "eval_objective_grad",
    "filtering_curve",
    "finite_difference_grad",
    "gradient_descent",
    "gradient_lipschitz",
    "graduated_descent",
    "lipschitz_grad_constant",
    "mc_expectation",
    "onemax",
    "rastrigin",
    "relax_grad",
    "relax_hessian",
    "relax_value",
    "score_gradient",
    "sigma_star",
    "sphere",
    "stochastic_threshold_study",
    "translation_gradient",
]
