"""Exception hierarchy shared by all modules."""


class RieszError(Exception):
    """Base class for package errors."""


class DomainError(RieszError, ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(RieszError, ArithmeticError):
    """A series or iteration failed to converge."""

    def __init__(self, message, terms_used=None, estimate=None):
        super().__init__(message)
        self.terms_used = terms_used
        self.estimate = estimate


class AccuracyError(RieszError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularityError(RieszError, ValueError):
    """Evaluation at a singular point of a kernel or configuration."""


class RegimeError(RieszError, ValueError):
    """Parameters outside the regime where a formula applies."""


class UnsupportedRegimeError(RegimeError):
    """Parameters for which the model itself is not supported (e.g. s <= -2)."""
