"""Exception hierarchy shared by all modules."""


class TTDRAError(Exception):
    """Base class for every error raised by this package."""


class MalformedInstance(TTDRAError, ValueError):
    pass


class MalformedSolution(TTDRAError, ValueError):
    pass


class InvalidPermutation(TTDRAError, ValueError):
    pass


class DimensionError(TTDRAError, ValueError):
    pass


class NumericError(TTDRAError, ValueError):
    pass


class StrategyTooLarge(TTDRAError, ValueError):
    pass


class SpectralFailure(TTDRAError, RuntimeError):
    pass


class InvalidSpectrum(TTDRAError, ValueError):
    pass


class ConvexityViolation(TTDRAError, RuntimeError):
    """A curvature along the search direction was not positive."""


class DescentViolation(TTDRAError, RuntimeError):
    """A projected steepest-descent step increased the relaxed objective."""


class TooLargeForOracle(TTDRAError, ValueError):
    pass


class ProjectionNotConverged(TTDRAError, RuntimeError):
    """Raised when the alternating projection runs out of sweeps.

    The last iterate and its worst row/column-sum violation are kept so the
    caller can inspect them or retry with a looser tolerance.
    """

    def __init__(self, message, iterate=None, violation=float("nan")):
        super().__init__(message)
        self.iterate = iterate
        self.violation = violation


class TimedOut(TTDRAError, RuntimeError):
    """The solver hit its wall-time budget; ``partial_perm`` holds the fixed pairs."""

    def __init__(self, message, partial_perm=None):
        super().__init__(message)
        self.partial_perm = dict(partial_perm or {})
