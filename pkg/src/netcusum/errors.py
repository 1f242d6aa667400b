"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its budget.

    The best estimate reached so far is kept on ``best_estimate`` so callers
    can decide whether it is good enough.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
