"""Fractional Laplacian and norms on spectral fields."""
import sys

import numpy as np

from fracback.errors import NumericalFailure, ParameterValidationError
from .schemas import NormSpec, SpectralField


def mode_rates(cap: int, beta: float) -> np.ndarray:
    """Eigenvalue powers p^(2 beta) for p = 0..cap (zero at p = 0)."""
    return np.arange(cap + 1, dtype=np.float64) ** (2.0 * beta)


def frac_laplacian_apply(field: SpectralField, beta: float) -> SpectralField:
    """Spectral fractional Laplacian: c_p -> p^(2 beta) c_p, constant mode removed."""
    if beta <= 0:
        raise ParameterValidationError(f"fractional order must be positive, got {beta}")
    return SpectralField(mode_rates(field.cap, beta) * field.coeffs)


def norm_weights(cap: int, spec: NormSpec) -> np.ndarray:
    """Per-mode weights w_p with ||f||^2 = sum_p w_p f_p^2."""
    p = np.arange(cap + 1, dtype=np.float64)
    if spec.kind == "L2":
        return np.ones(cap + 1)
    if spec.kind == "H_gamma":
        # 0**0 == 1 keeps gamma = 0 equal to L2
        return p ** (4.0 * spec.gamma)
    with np.errstate(over="ignore"):
        weights = p ** (4.0 * spec.beta) * np.exp(2.0 * spec.T * spec.a0 * p ** (2.0 * spec.beta))
    weights[0] = 0.0
    return weights


def squared_norms(coeffs: np.ndarray, spec: NormSpec) -> np.ndarray:
    """Squared norms of coefficient rows (..., cap+1)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    weights = norm_weights(coeffs.shape[-1] - 1, spec)
    active = np.any(np.atleast_2d(coeffs).reshape(-1, coeffs.shape[-1]) != 0.0, axis=0)
    if not np.all(np.isfinite(weights[active])):
        error_msg = f"{spec.kind} weight exceeds floating range on an active mode"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise NumericalFailure(error_msg)
    weights = np.where(active, weights, 0.0)
    with np.errstate(over="ignore"):
        total = np.sum(weights * coeffs**2, axis=-1)
    if not np.all(np.isfinite(total)):
        error_msg = f"{spec.kind} norm overflowed"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise NumericalFailure(error_msg)
    return total


def norm(field: SpectralField, spec: NormSpec) -> float:
    """L2, H^gamma or Gevrey-weighted norm of a spectral field."""
    return float(np.sqrt(squared_norms(field.coeffs, spec)))
