"""Exception types shared by all fracback modules."""


class FracbackError(Exception):
    """Base class for fracback errors."""


class ParameterValidationError(FracbackError, ValueError):
    """Inputs or preconditions of an operation are invalid."""


class NumericalFailure(FracbackError, RuntimeError):
    """A computation produced non-finite values or left floating range."""


class ConvergenceError(NumericalFailure):
    """An iteration did not reach its tolerance."""

    def __init__(self, message: str, iterations: int = 0, last_ratio: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.last_ratio = last_ratio
