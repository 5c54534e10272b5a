"""Neumann eigenbasis, midpoint-node transforms and aliasing corrections."""
import sys
from functools import cached_property

import numpy as np

from fracback.errors import ParameterValidationError
from .schemas import GridSamples, SpectralField

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
INV_SQRT_PI = 1.0 / np.sqrt(np.pi)


def eigenfunction_value(p: int, x):
    """Evaluate phi_p(x): 1/sqrt(pi) for p = 0, sqrt(2/pi) cos(px) otherwise."""
    if p < 0:
        raise ParameterValidationError(f"mode index must be nonnegative, got {p}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > np.pi):
        error_msg = "eigenfunctions are defined on [0, pi] only"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise ParameterValidationError(error_msg)
    if p == 0:
        value = np.full_like(x, INV_SQRT_PI)
    else:
        value = SQRT_2_OVER_PI * np.cos(p * x)
    return float(value) if value.ndim == 0 else value


def midpoint_nodes(n: int) -> np.ndarray:
    """Midpoint nodes x_k = pi (2k - 1) / (2n), k = 1..n."""
    if n < 2:
        raise ParameterValidationError(f"node count must be at least 2, got {n}")
    k = np.arange(1, n + 1)
    return np.pi * (2 * k - 1) / (2 * n)


def basis_matrix(x: np.ndarray, cap: int) -> np.ndarray:
    """Matrix B[k, p] = phi_p(x_k) for p = 0..cap."""
    matrix = SQRT_2_OVER_PI * np.cos(np.outer(x, np.arange(cap + 1)))
    matrix[:, 0] = INV_SQRT_PI
    return matrix


class MidpointTransform:
    """Synthesis and projection between coefficients and midpoint samples.

    Projection uses the midpoint rule (pi/n) sum_k f(x_k) phi_p(x_k), which is
    exact for fields bandlimited below n. For p = 0 it equals sqrt(pi) times
    the sample mean.
    """

    def __init__(self, n: int, cap: int):
        """Transform between n midpoint samples and modes 0..cap."""
        if cap < 0:
            raise ParameterValidationError(f"cap must be nonnegative, got {cap}")
        self.n = n
        self.cap = cap
        self.nodes = midpoint_nodes(n)

    @cached_property
    def matrix(self) -> np.ndarray:
        return basis_matrix(self.nodes, self.cap)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Sample coefficient arrays of shape (..., cap+1) at the nodes."""
        return np.asarray(coeffs) @ self.matrix.T

    def project(self, values: np.ndarray) -> np.ndarray:
        """Project node values of shape (..., n) onto modes 0..cap."""
        return (np.pi / self.n) * (np.asarray(values) @ self.matrix)


def synthesize(field: SpectralField, n: int) -> GridSamples:
    """Sample a spectral field at the n midpoint nodes."""
    transform = MidpointTransform(n, field.cap)
    return GridSamples(n=n, values=transform.synthesize(field.coeffs))


def discrete_coefficient(samples: GridSamples, p: int) -> float:
    """Mean for p = 0, (pi/n) sum f(x_k) phi_p(x_k) for 1 <= p <= n-1."""
    if p < 0 or p >= samples.n:
        error_msg = f"mode {p} outside the resolvable range 0..{samples.n - 1}"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise ParameterValidationError(error_msg)
    if p == 0:
        return float(np.mean(samples.values))
    phi = SQRT_2_OVER_PI * np.cos(p * samples.nodes)
    return float(np.pi / samples.n * np.dot(samples.values, phi))


def discrete_projection(values: np.ndarray, n: int, max_mode: int) -> np.ndarray:
    """Orthonormal coefficients of modes 0..max_mode from node values (..., n).

    Mode 0 is stored as sqrt(pi) times the sample mean so the field evaluates
    to that mean.
    """
    if max_mode >= n:
        raise ParameterValidationError(f"cutoff {max_mode} must be below the node count {n}")
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != n:
        raise ParameterValidationError(f"expected {n} node values, got {values.shape[-1]}")
    return MidpointTransform(n, max_mode).project(values)


def aliasing_tail(field: SpectralField, n: int, p: int) -> float:
    """Aliasing correction G_np so that <f, phi_p> = discrete - G_np.

    For p = 0 the correction is taken in the mean channel that
    discrete_coefficient returns.
    """
    if p < 0 or p >= n:
        raise ParameterValidationError(f"mode {p} outside the resolvable range 0..{n - 1}")
    c = field.coeffs
    tail = 0.0
    l = 1
    while 2 * l * n - p <= field.cap:
        sign = -1.0 if l % 2 else 1.0
        if p == 0:
            tail += sign * c[2 * l * n]
        else:
            upper = p + 2 * l * n
            tail += sign * ((c[upper] if upper <= field.cap else 0.0) + c[2 * l * n - p])
        l += 1
    if p == 0:
        tail *= SQRT_2_OVER_PI
    return float(tail)
