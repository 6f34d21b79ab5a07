"""Maximum-likelihood estimation for the multivariate Watson distribution."""

from .kappa import (
    AsymptoticPoint,
    Method,
    NewtonControls,
    NewtonConvergenceError,
    SolveReport,
    bbg,
    bbg_violation_intervals,
    bound_B,
    bound_L,
    bound_U,
    combined_choice,
    estimate,
    estimate_combined,
    kappa_asymptotic,
    solve_newton,
)
from .kummer import (
    EvalControls,
    KummerConvergenceError,
    KummerDomainError,
    KummerParams,
    kummer_ratio,
    kummer_ratio_complement,
    kummer_ratio_derivative,
    log_kummer_m,
)
from .linalg import EigDecomposition, JacobiConvergenceError, scatter, sym_eig
from .mixture import (
    ClusterMetrics,
    EmConfig,
    MixtureModel,
    Responsibilities,
    SharedFixed,
    diametrical,
    e_step_hard,
    e_step_soft,
    em_fit,
    label_accuracy,
    m_step,
    metrics,
)
from .watson import FitReport, WatsonParams, fit, log_likelihood, log_pdf, sample

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPoint",
    "ClusterMetrics",
    "EigDecomposition",
    "EmConfig",
    "EvalControls",
    "FitReport",
    "JacobiConvergenceError",
    "KummerConvergenceError",
    "KummerDomainError",
    "KummerParams",
    "Method",
    "MixtureModel",
    "NewtonControls",
    "NewtonConvergenceError",
    "Responsibilities",
    "SharedFixed",
    "SolveReport",
    "WatsonParams",
    "bbg",
    "bbg_violation_intervals",
    "bound_B",
    "bound_L",
    "bound_U",
    "diametrical",
    "e_step_hard",
    "e_step_soft",
    "em_fit",
    "combined_choice",
    "estimate",
    "estimate_combined",
    "fit",
    "kappa_asymptotic",
    "kummer_ratio",
    "kummer_ratio_complement",
    "kummer_ratio_derivative",
    "label_accuracy",
    "log_kummer_m",
    "log_likelihood",
    "log_pdf",
    "m_step",
    "metrics",
    "sample",
    "scatter",
    "solve_newton",
    "sym_eig",
]
