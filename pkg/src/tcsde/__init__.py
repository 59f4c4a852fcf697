"""Time-changed SDE toolkit.

Scalar SDEs driven by an inverse alpha-stable clock: subordinator path
sampling, the step-function inverse clock, stochastic-theta integration
with a forward-backward companion scheme, and Monte Carlo campaigns for
moment formulas, strong convergence, and mean-square stability with
Mittag-Leffler decay envelopes.  A compiled kernel extension accelerates
the inner loops when present; the pure-Python fallback is selected
automatically and exposes the same interfaces.
"""

__version__ = "0.1.0"

from .errors import (Error, DomainError, EvaluationError, BoundaryUndetermined,
                     SolverError, ConfigError, ResourceError,
                     TooManyFailedPaths, FitError, RenderError)
from .special_fn import (StabilityIndex, MomentQuery, DIVERGENT, Divergent,
                         mittag_leffler, log_gamma,
                         inverse_subordinator_moment, exp_moment_series,
                         exact_moment_bound)
from .clock import (SubordinatorPath, InverseSubordinatorPath, BrownianDriver,
                    CoupledPaths, sample_stable_increment, stable_increments,
                    simulate_subordinator, simulate_subordinator_steps,
                    invert_path, brownian_increments, sample_coupled)
from .models import (ModelDescriptor, GridSpec, AssumptionCheck,
                     AssumptionReport, Asymptotics, catalog, make_builtin,
                     make_expression_model, validate_assumptions,
                     classify_asymptotics)
from .theta import (SchemeConfig, TrajectoryRecord, StabilityThreshold,
                    max_stepsize, implicit_solve, st_step, fbem_step,
                    integrate, stability_threshold)
from .experiments import (MonteCarloConfig, ClosedForm, FineGrid,
                          StrongErrorRow, StrongErrorReport,
                          ConvergenceReport, StabilityCurve, MomentRow,
                          MomentReport, LyapunovCertificate, EnvelopeReport,
                          BoundRow, BoundReport, strong_error, fit_order,
                          stability_curve, moment_validation,
                          ml_envelope_check, exact_moment_bound_check)
from .backend import backend_name, compiled_available
from .rng import substream, seed_lineage

__all__ = [
    "__version__",
    "Error", "DomainError", "EvaluationError", "BoundaryUndetermined",
    "SolverError", "ConfigError", "ResourceError", "TooManyFailedPaths",
    "FitError", "RenderError",
    "StabilityIndex", "MomentQuery", "DIVERGENT", "Divergent",
    "mittag_leffler", "log_gamma", "inverse_subordinator_moment",
    "exp_moment_series", "exact_moment_bound",
    "SubordinatorPath", "InverseSubordinatorPath", "BrownianDriver",
    "CoupledPaths", "sample_stable_increment", "stable_increments",
    "simulate_subordinator", "simulate_subordinator_steps", "invert_path",
    "brownian_increments", "sample_coupled",
    "ModelDescriptor", "GridSpec", "AssumptionCheck", "AssumptionReport",
    "Asymptotics", "catalog", "make_builtin", "make_expression_model",
    "validate_assumptions", "classify_asymptotics",
    "SchemeConfig", "TrajectoryRecord", "StabilityThreshold", "max_stepsize",
    "implicit_solve", "st_step", "fbem_step", "integrate",
    "stability_threshold",
    "MonteCarloConfig", "ClosedForm", "FineGrid", "StrongErrorRow",
    "StrongErrorReport", "ConvergenceReport", "StabilityCurve", "MomentRow",
    "MomentReport", "LyapunovCertificate", "EnvelopeReport", "BoundRow",
    "BoundReport", "strong_error", "fit_order", "stability_curve",
    "moment_validation", "ml_envelope_check", "exact_moment_bound_check",
    "backend_name", "compiled_available",
    "substream", "seed_lineage",
]
