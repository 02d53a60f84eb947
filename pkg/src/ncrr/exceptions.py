"""Exception types raised across the package."""


class NcrrError(Exception):
    """Base class for all package errors."""


class ParameterError(NcrrError, ValueError):
    """Invalid regularizer or solver parameters."""


class DomainError(NcrrError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedKindError(NcrrError, TypeError):
    """The operation is not defined for this regularizer kind."""


class NumericalError(NcrrError, ArithmeticError):
    """Non-finite values appeared during a computation."""

    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = sweep


class ConditionFailed(NcrrError):
    """A sufficient condition required by a bound does not hold."""


class InsufficientData(NcrrError, ValueError):
    """Required inputs (truth or noise) are missing."""
