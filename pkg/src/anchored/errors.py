"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class NumericError(RuntimeError):
    """Raised when a computation diverges or fails to converge.

    Carries optional context: the last estimate of an iterative routine
    and/or the iteration index at which the failure occurred.
    """

    def __init__(self, message, estimate=None, step=None):
        super().__init__(message)
        self.estimate = estimate
        self.step = step


class DataError(ValueError):
    """Raised when a trace or report lacks data a diagnostic requires."""
