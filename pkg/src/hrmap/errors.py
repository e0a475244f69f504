"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`HrmapError`,
which is also a :class:`ValueError` so callers validating input can catch either.
"""


class HrmapError(ValueError):
    """Base class for validation failures."""


class InvalidInput(HrmapError):
    pass


class OutOfRange(HrmapError):
    pass


class DimensionMismatch(HrmapError):
    pass


class NotCovered(HrmapError):
    pass


class InsufficientData(HrmapError):
    pass


class Degenerate(HrmapError):
    pass


class BehindCamera(HrmapError):
    pass


class NoConvergence(HrmapError):
    """Iterative solver hit its budget. ``best`` holds the best iterate seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NumericalFailure(HrmapError):
    pass


class InsufficientHistory(HrmapError):
    pass


class UnmappedTimestep(HrmapError):
    pass


class DegenerateProfile(HrmapError):
    pass
