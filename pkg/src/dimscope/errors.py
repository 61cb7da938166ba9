"""Exception hierarchy.

The CLI maps these onto exit codes: data problems exit 3, fit problems 4.
"""


class DimscopeError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(DimscopeError, ValueError):
    """Malformed data: wrong shape, non-finite entries, too few samples."""


class DegenerateSampleError(InvalidInputError):
    """A sample coincides with the barycenter and cannot be projected."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class InvalidSpecError(InvalidInputError):
    """Generator parameters violate the family's constraints."""


class DomainError(DimscopeError, ValueError):
    """A special-function argument is outside its domain."""


class UnfittableCurveError(DimscopeError):
    """The correlation-integral curve carries too little information to fit."""


class NoReliableScaleError(DimscopeError):
    """A multiscale sweep produced no reliable local estimate."""
