"""Schemas for the cosine eigenbasis on (0, pi)."""
from dataclasses import dataclass
from typing import Literal, Mapping, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fracback.errors import ParameterValidationError


def _frozen_array(values, name: str, ndim: int = 1) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ParameterValidationError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ParameterValidationError(f"{name} contains non-finite entries")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SpectralField:
    """Orthonormal cosine coefficients c_0..c_P of a function on (0, pi)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs, "coeffs"))
        if self.coeffs.size == 0:
            raise ParameterValidationError("a spectral field needs at least the constant mode")

    @property
    def cap(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def zeros(cls, cap: int) -> "SpectralField":
        return cls(np.zeros(cap + 1))

    @classmethod
    def mode(cls, p: int, cap: Optional[int] = None, scale: float = 1.0) -> "SpectralField":
        """Single eigenfunction scale * phi_p."""
        cap = p if cap is None else cap
        if p < 0 or p > cap:
            raise ParameterValidationError(f"mode {p} outside 0..{cap}")
        coeffs = np.zeros(cap + 1)
        coeffs[p] = scale
        return cls(coeffs)

    @classmethod
    def from_modes(cls, modes: Mapping[int, float], cap: Optional[int] = None) -> "SpectralField":
        top = max(modes, default=0)
        cap = top if cap is None else cap
        if any(p < 0 or p > cap for p in modes):
            raise ParameterValidationError(f"modes {sorted(modes)} do not fit cap {cap}")
        coeffs = np.zeros(cap + 1)
        for p, value in modes.items():
            coeffs[p] = value
        return cls(coeffs)

    def padded(self, cap: int) -> "SpectralField":
        """Zero-pad or truncate to the given cap."""
        coeffs = np.zeros(cap + 1)
        keep = min(cap, self.cap) + 1
        coeffs[:keep] = self.coeffs[:keep]
        return SpectralField(coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        cap = max(self.cap, other.cap)
        return SpectralField(self.padded(cap).coeffs + other.padded(cap).coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        cap = max(self.cap, other.cap)
        return SpectralField(self.padded(cap).coeffs - other.padded(cap).coeffs)

    def scaled(self, factor: float) -> "SpectralField":
        return SpectralField(factor * self.coeffs)


@dataclass(frozen=True)
class GridSamples:
    """Values f(x_k) at the midpoint nodes x_k = pi(2k-1)/(2n)."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ParameterValidationError(f"node count must be at least 2, got {self.n}")
        values = _frozen_array(self.values, "values")
        if values.size != self.n:
            raise ParameterValidationError(f"expected {self.n} samples, got {values.size}")
        object.__setattr__(self, "values", values)

    @property
    def nodes(self) -> np.ndarray:
        k = np.arange(1, self.n + 1)
        return np.pi * (2 * k - 1) / (2 * self.n)


class NormSpec(BaseModel):
    """Which norm to evaluate on a spectral field."""

    kind: Literal["L2", "H_gamma", "V_tilde"] = Field(default="L2", description="Norm family")
    gamma: float = Field(default=0.0, ge=0.0, description="Sobolev order for H_gamma")
    T: Optional[float] = Field(default=None, gt=0.0, description="Final time in the Gevrey weight")
    a0: Optional[float] = Field(default=None, gt=0.0, description="Coefficient bound in the Gevrey weight")
    beta: Optional[float] = Field(default=None, gt=0.0, description="Fractional order in the Gevrey weight")

    @model_validator(mode="after")
    def check_gevrey_parameters(self) -> "NormSpec":
        if self.kind == "V_tilde" and None in (self.T, self.a0, self.beta):
            raise ValueError("V_tilde norm needs T, a0 and beta")
        return self

    @classmethod
    def l2(cls) -> "NormSpec":
        return cls(kind="L2")

    @classmethod
    def h_gamma(cls, gamma: float) -> "NormSpec":
        return cls(kind="H_gamma", gamma=gamma)

    @classmethod
    def v_tilde(cls, T: float, a0: float, beta: float) -> "NormSpec":
        return cls(kind="V_tilde", T=T, a0=a0, beta=beta)
