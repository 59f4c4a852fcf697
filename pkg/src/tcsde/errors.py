"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all package errors."""


class DomainError(Error, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class EvaluationError(Error, ArithmeticError):
    """A series or iteration hit its term cap before converging.

    Carries the partial sum and the number of terms consumed so callers can
    see how far the evaluation got.
    """

    def __init__(self, message, partial_sum=None, terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


class BoundaryUndetermined(Error, ValueError):
    """A query sits on a classification boundary where no finite/infinite
    verdict can be given at working precision."""


class SolverError(Error, ArithmeticError):
    """Damped Newton and the bisection fallback both failed to reach the
    residual tolerance for an implicit step."""

    def __init__(self, message, residual=None, bracket=None, step_index=None):
        super().__init__(message)
        self.residual = residual
        self.bracket = bracket
        self.step_index = step_index


class ConfigError(Error, ValueError):
    """A configuration value is missing, unknown, or out of range.

    ``key`` holds the dotted path of the offending entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ResourceError(Error, RuntimeError):
    """A safety cap was exceeded (path length, worker budget)."""


class TooManyFailedPaths(Error, RuntimeError):
    """More than the tolerated fraction of Monte Carlo paths failed."""


class FitError(Error, ValueError):
    """A regression has too few usable points to fit."""


class RenderError(Error, ValueError):
    """A report cannot be drawn (empty or single-point series)."""
