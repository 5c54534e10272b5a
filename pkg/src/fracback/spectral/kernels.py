"""Trapezoid quadrature of per-mode Duhamel integrals on a time grid.

Exponential factors are applied exactly between nodes, so the recursions
stay within range wherever the integrand itself does.
"""
import numpy as np

from fracback.errors import ParameterValidationError


def grid_steps(grid: np.ndarray) -> np.ndarray:
    """Validate a time grid starting at 0 and return its step sizes."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2:
        raise ParameterValidationError("a time grid needs at least two points")
    if grid[0] != 0.0:
        raise ParameterValidationError(f"time grid must start at 0, got {grid[0]}")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise ParameterValidationError("time grid must be strictly increasing")
    return steps


def backward_duhamel(exponents: np.ndarray, steps: np.ndarray, values: np.ndarray) -> np.ndarray:
    """J_j = int_{t_j}^{t_m} exp(int_{t_j}^{s} kappa) v(s) ds for every node j.

    exponents[j] holds int_{t_j}^{t_{j+1}} kappa per mode, shape (m, P);
    values holds v at the nodes, shape (m+1, P).
    """
    growth = np.exp(exponents)
    out = np.zeros_like(values, dtype=np.float64)
    for j in range(values.shape[0] - 2, -1, -1):
        half = 0.5 * steps[j]
        out[j] = growth[j] * out[j + 1] + half * (values[j] + growth[j] * values[j + 1])
    return out


def forward_duhamel(exponents: np.ndarray, steps: np.ndarray, values: np.ndarray) -> np.ndarray:
    """I_j = int_{t_0}^{t_j} exp(int_{s}^{t_j} kappa) v(s) ds for every node j.

    Row j of the output depends only on values at nodes 0..j.
    """
    growth = np.exp(exponents)
    out = np.zeros_like(values, dtype=np.float64)
    for j in range(values.shape[0] - 1):
        half = 0.5 * steps[j]
        out[j + 1] = growth[j] * (out[j] + half * values[j]) + half * values[j + 1]
    return out
