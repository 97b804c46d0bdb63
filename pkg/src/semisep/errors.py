"""Exception types shared across the package."""


class SemisepError(Exception):
    """Base class for all package errors."""


class DimensionError(SemisepError, ValueError):
    """Matrix or kernel shapes are inconsistent with the operation."""


class DomainError(SemisepError, ValueError):
    """Argument outside the admissible domain (interval, spectral plane)."""


class ContractError(SemisepError, ValueError):
    """A stated precondition is violated (e.g. hermiticity beyond tolerance)."""


class ConvergenceError(SemisepError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class TruncationError(SemisepError, RuntimeError):
    """Interval truncation could not push the tail mass below tolerance."""


class SingularOperatorError(SemisepError, RuntimeError):
    """A required operator is numerically singular."""


class GridSizeError(SemisepError, ValueError):
    """Requested dense discretization exceeds the desk-scale size guard."""


class RouteMismatchError(SemisepError, RuntimeError):
    """Independent computation routes disagree beyond tolerance.

    Carries the per-route values in ``details`` so callers can inspect them.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details


class ResonanceWarning(UserWarning):
    """A spectral quantity sits too close to a threshold to be conclusive."""
