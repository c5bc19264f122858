"""Exception types shared across the package."""


class TickvolError(Exception):
    """Base class for package errors."""


class DomainError(TickvolError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ScoreUndefinedError(TickvolError, ArithmeticError):
    """A score could not be evaluated (underflowed probability or boundary).

    `index` is the observation index when raised from a filter, else None.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FilterDivergedError(TickvolError, ArithmeticError):
    """A variance recursion produced a non-finite or non-positive state."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IngestError(TickvolError, ValueError):
    """Raised when an input file cannot be parsed at all."""

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no
