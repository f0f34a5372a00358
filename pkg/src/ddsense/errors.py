"""Exception hierarchy shared across the package."""


class DdsenseError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DdsenseError, ValueError):
    """Invalid scenario, grid, or campaign configuration."""


class FormatError(DdsenseError, ValueError):
    """A structured text file could not be parsed or failed validation."""


class SingularModelError(DdsenseError):
    """The model matrix is rank deficient (e.g. coinciding paths)."""


class OptimizationError(DdsenseError):
    """The iterative refinement produced a non-finite cost.

    Carries the accepted-cost sequence up to the failure in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
