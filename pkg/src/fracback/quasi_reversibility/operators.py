"""Data approximations, head/tail multipliers and scalar parameter rules."""
import math
import sys
from typing import Callable, Literal

import numpy as np
from scipy.optimize import bisect

from fracback.errors import ParameterValidationError
from fracback.spectral import GridSamples, SpectralField, discrete_projection, mode_rates
from .schemas import QRParams

BISECTION_MAX_ITERS = 200
# Q beyond this is treated as "no clamping needed"
Q_SEARCH_LIMIT = 1e12


def data_approx_final(samples: GridSamples, M_n: int, n: int) -> SpectralField:
    """Discrete projection of the noisy final samples onto modes 0..M_n."""
    if samples.n != n:
        raise ParameterValidationError(f"expected {n} samples, got {samples.n}")
    return SpectralField(discrete_projection(samples.values, n, M_n))


def data_approx_source(source_paths: np.ndarray, M_n: int, n: int, grid: np.ndarray) -> np.ndarray:
    """Per-time discrete projection of the noisy source paths, shape (m+1, M_n+1)."""
    source_paths = np.asarray(source_paths, dtype=np.float64)
    if source_paths.shape != (np.asarray(grid).size, n):
        raise ParameterValidationError(
            f"source paths of shape {source_paths.shape} do not match grid x nodes"
        )
    return discrete_projection(source_paths, n, M_n)


def head_mask(cap: int, threshold: float) -> np.ndarray:
    """True for the modes whose rate stays below the tail threshold."""
    return np.arange(cap + 1) < threshold


def head_tail_apply(field: SpectralField, which: Literal["head", "tail"], params: QRParams,
                    beta: float) -> SpectralField:
    """Tail: p^{2 beta} c_p for p >= p*. Head: a0 p^{2 beta} c_p for p < p*."""
    rates = mode_rates(field.cap, beta)
    head = head_mask(field.cap, params.tail_threshold(beta))
    if which == "tail":
        return SpectralField(np.where(head, 0.0, rates * field.coeffs))
    if which == "head":
        return SpectralField(np.where(head, params.a0 * rates * field.coeffs, 0.0))
    raise ParameterValidationError(f"unknown operator '{which}', expected head or tail")


def solve_t_n(M_n: int, beta: float, T: float) -> float:
    """Root of e^{-t M^beta} = t in (0, T)."""
    rate = M_n**beta
    if not rate > math.log(1.0 / T) / T:
        error_msg = f"t_n needs M^beta > log(1/T)/T, got M^beta={rate:.4g}"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise ParameterValidationError(error_msg)
    return float(
        bisect(lambda t: math.exp(-t * rate) - t, 0.0, T, xtol=1e-16, rtol=4 * np.finfo(float).eps,
               maxiter=BISECTION_MAX_ITERS)
    )


def choose_Q_n(n: int, T: float, profile: Callable[[float], float]) -> float:
    """Largest Q with K(Q) <= log(log n)/(2T), or inf when K never exceeds it."""
    if n < 3:
        raise ParameterValidationError(f"clamp rule needs n >= 3, got {n}")
    budget = math.log(math.log(n)) / (2.0 * T)
    floor_q = 1e-12
    if profile(floor_q) > budget:
        print(
            f"[WARNING] K(Q) exceeds the budget {budget:.4g} for every Q; using the widest Q at min K",
            file=sys.stderr,
        )
        budget = profile(floor_q) * (1.0 + 1e-12) + 1e-12

    upper = 1.0
    while profile(upper) <= budget:
        upper *= 2.0
        if upper > Q_SEARCH_LIMIT:
            return math.inf
    lower = upper / 2.0 if upper > 1.0 else floor_q
    if profile(lower) > budget:
        lower = floor_q
    return float(bisect(lambda q: profile(q) - budget, lower, upper, xtol=1e-13,
                        maxiter=BISECTION_MAX_ITERS))
