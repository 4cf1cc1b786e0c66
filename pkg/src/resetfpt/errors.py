"""Exception hierarchy shared across the package."""


class ResetFptError(Exception):
    """Base class for all package errors."""


class DomainError(ResetFptError):
    """Input outside the mathematical domain of an operation."""


class ConfigError(ResetFptError):
    """Invalid simulation or scenario configuration."""


class SolverError(ResetFptError):
    """Linear or boundary-value solve failed or did not meet tolerance."""


class QuadratureError(ResetFptError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class OptimError(ResetFptError):
    """Optimizer failed to converge; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RangeError(ResetFptError):
    """Target value lies outside the attainable range of a forward map."""

    def __init__(self, message, attainable=None):
        super().__init__(message)
        self.attainable = attainable


class SingularityError(ResetFptError):
    """Evaluation requested inside a guard band around a removable singularity."""


class DegenerateError(ResetFptError):
    """A closed-form expression degenerates (vanishing denominator)."""


class NumericalError(ResetFptError):
    """Extrapolated numerical estimate failed its internal convergence check."""


class InversionError(ResetFptError):
    """Numerical transform inversion failed its normalization check."""


class CensoringWarning(UserWarning):
    """Monte Carlo run left more than the tolerated fraction of paths unfinished."""
