"""Regularization of backward nonlinear space-fractional diffusion with random noise."""

from fracback.errors import ConvergenceError, FracbackError, NumericalFailure, ParameterValidationError

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "FracbackError",
    "NumericalFailure",
    "ParameterValidationError",
    "__version__",
]
