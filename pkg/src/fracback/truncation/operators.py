"""Data operators, cutoff rule and nonlinearity clamp."""
import math
import sys
from dataclasses import replace

import numpy as np

from fracback.errors import ParameterValidationError
from fracback.forward import Nonlinearity
from fracback.forward.solver import MAX_EXPONENT
from fracback.spectral import GridSamples, SpectralField, discrete_projection, mode_rates
from fracback.spectral.kernels import backward_duhamel, grid_steps


def choose_M_n(n: int, sigma_rate: float, T: float, beta: float) -> int:
    """max(1, floor((sigma/(2T) log n)^(1/(2 beta))))."""
    if n < 3:
        raise ParameterValidationError(f"cutoff rule needs n >= 3, got {n}")
    if not 0.0 < sigma_rate < 1.0:
        raise ParameterValidationError(f"rate exponent must lie in (0, 1), got {sigma_rate}")
    value = (sigma_rate / (2.0 * T) * math.log(n)) ** (1.0 / (2.0 * beta))
    return max(1, math.floor(value))


def check_amplification(exponent: float, what: str) -> None:
    """Raise NumericalFailure when e^exponent leaves floating range."""
    if exponent > MAX_EXPONENT:
        error_msg = f"{what}: amplification exponent {exponent:.4g} exceeds {MAX_EXPONENT:g}"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise ParameterValidationError(error_msg)


def _grid_index(grid: np.ndarray, t: float) -> int:
    index = int(np.argmin(np.abs(grid - t)))
    if not np.isclose(grid[index], t, rtol=0.0, atol=1e-12):
        raise ParameterValidationError(f"time {t} is not a node of the grid")
    return index


def phi_data_path(samples: GridSamples, M_n: int, grid: np.ndarray, beta: float, T: float) -> np.ndarray:
    """Phi(f)(t_j) for every grid time, shape (m+1, M_n+1)."""
    grid = np.asarray(grid, dtype=np.float64)
    check_amplification((T - grid.min()) * M_n ** (2.0 * beta), "phi_data")
    base = discrete_projection(samples.values, samples.n, M_n)
    exponents = np.outer(T - grid, mode_rates(M_n, beta))
    return np.exp(exponents) * base


def phi_data(samples: GridSamples, M_n: int, n: int, t: float, beta: float, T: float) -> SpectralField:
    """Sample mean plus discrete coefficients amplified by e^{(T-t) p^{2 beta}} up to M_n."""
    if samples.n != n:
        raise ParameterValidationError(f"expected {n} samples, got {samples.n}")
    if not 0.0 <= t <= T:
        raise ParameterValidationError(f"time {t} outside [0, {T}]")
    return SpectralField(phi_data_path(samples, M_n, np.array([t]), beta, T)[0])


def phi_source_path(source_paths: np.ndarray, M_n: int, grid: np.ndarray, beta: float) -> np.ndarray:
    """Phi-tilde(f)(t_j) for every grid time, shape (m+1, M_n+1).

    Modes p >= 1 carry int_t^T e^{(s-t) p^{2 beta}} d_p(s) ds by the
    trapezoid rule; mode 0 carries the instantaneous sample mean at t.
    """
    grid = np.asarray(grid, dtype=np.float64)
    steps = grid_steps(grid)
    source_paths = np.asarray(source_paths, dtype=np.float64)
    n = source_paths.shape[1]
    check_amplification(grid[-1] * M_n ** (2.0 * beta), "phi_source")
    projected = discrete_projection(source_paths, n, M_n)
    rates = mode_rates(M_n, beta)
    out = backward_duhamel(np.outer(steps, rates), steps, projected)
    out[:, 0] = projected[:, 0]
    return out


def phi_source(source_paths: np.ndarray, M_n: int, n: int, t: float, beta: float,
               grid: np.ndarray) -> SpectralField:
    """Phi-tilde of the source paths at a grid time t."""
    source_paths = np.asarray(source_paths, dtype=np.float64)
    if source_paths.shape[1] != n:
        raise ParameterValidationError(f"expected {n} source paths, got {source_paths.shape[1]}")
    grid = np.asarray(grid, dtype=np.float64)
    index = _grid_index(grid, t)
    return SpectralField(phi_source_path(source_paths, M_n, grid, beta)[index])


def clamp_nonlinearity(nonlinearity: Nonlinearity, Q: float) -> Nonlinearity:
    """F evaluated on u clipped to [-Q, Q]; declared Lipschitz bound 2 K(Q)."""
    if Q <= 0:
        raise ParameterValidationError(f"clamp level must be positive, got {Q}")
    if math.isinf(Q):
        return nonlinearity
    func = nonlinearity.func
    level = 2.0 * nonlinearity.local_lipschitz(Q)
    sup = float(np.max(np.abs(func(np.linspace(-Q, Q, 4001)))))
    return replace(
        nonlinearity,
        name=f"{nonlinearity.name}|Q={Q:g}",
        func=lambda u: func(np.clip(u, -Q, Q)),
        lipschitz=level,
        profile=lambda q: level,
        sup_norm=sup,
    )
