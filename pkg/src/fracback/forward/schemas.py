"""Schemas for ground-truth problem instances and trajectories."""
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fracback.errors import ParameterValidationError
from fracback.spectral import SpectralField
from .nonlinearity import Nonlinearity


class CoefficientSpec(BaseModel):
    """Time coefficient a(t) = base + amplitude * sin(frequency * t)."""
    kind: Literal["constant", "oscillating"] = Field(default="constant", description="Coefficient family")
    base: float = Field(default=1.0, gt=0.0, description="Mean level of a(t)")
    amplitude: float = Field(default=0.0, ge=0.0, description="Oscillation amplitude")
    frequency: float = Field(default=1.0, description="Angular frequency of the oscillation")

    @model_validator(mode="after")
    def check_positive(self) -> "CoefficientSpec":
        if self.kind == "oscillating" and self.amplitude >= self.base:
            raise ValueError("oscillating coefficient must stay positive: amplitude < base")
        return self

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "constant":
            return np.full_like(t, self.base)
        return self.base + self.amplitude * np.sin(self.frequency * t)

    @property
    def upper(self) -> float:
        return self.base if self.kind == "constant" else self.base + self.amplitude

    def is_unit(self) -> bool:
        return self.kind == "constant" and self.base == 1.0

    def step_integrals(self, grid: np.ndarray) -> np.ndarray:
        """Simpson integrals of a over each grid step (exact for constants)."""
        left, right = grid[:-1], grid[1:]
        mid = 0.5 * (left + right)
        return (right - left) * (self(left) + 4.0 * self(mid) + self(right)) / 6.0


def _unit_profile(t: np.ndarray) -> np.ndarray:
    return np.ones_like(t)


@dataclass(frozen=True)
class SourceTerm:
    """Separable source g(x, t) = profile(t) * sum_p g_p phi_p(x)."""

    spatial: SpectralField
    profile: Callable[[np.ndarray], np.ndarray] = _unit_profile

    def coefficients(self, times: np.ndarray, cap: int) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        return np.outer(self.profile(times), self.spatial.padded(cap).coeffs)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.spatial.coeffs)


@dataclass(frozen=True)
class ProblemInstance:
    """u_t + a(t) A^beta u = F(u) + g on (0, pi) with Neumann data, u(0) = u_0."""

    beta: float
    T: float
    coefficient: CoefficientSpec
    a0: float
    nonlinearity: Nonlinearity
    initial_state: SpectralField
    source: Optional[SourceTerm] = None
    name: str = field(default="instance", compare=False)

    def __post_init__(self):
        if self.beta <= 0.5:
            raise ParameterValidationError(f"fractional order must exceed 1/2, got {self.beta}")
        if self.T <= 0:
            raise ParameterValidationError(f"final time must be positive, got {self.T}")
        if self.coefficient.upper > self.a0:
            raise ParameterValidationError(
                f"coefficient reaches {self.coefficient.upper} above its declared bound a0={self.a0}"
            )

    @property
    def has_source(self) -> bool:
        return self.source is not None and not self.source.is_zero

    def source_coefficients(self, times: np.ndarray, cap: int) -> np.ndarray:
        """Source coefficients on times, zeros when there is no source."""
        times = np.asarray(times, dtype=np.float64)
        if self.source is None:
            return np.zeros((times.size, cap + 1))
        return self.source.coefficients(times, cap)


@dataclass(frozen=True)
class Trajectory:
    """Spectral states of u on a time grid covering [0, T]."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        states = np.array(self.states, dtype=np.float64)
        if times.ndim != 1 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ParameterValidationError("trajectory times must start at 0 and increase strictly")
        if states.ndim != 2 or states.shape[0] != times.size:
            raise ParameterValidationError(
                f"states shape {states.shape} does not match {times.size} grid times"
            )
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def cap(self) -> int:
        return self.states.shape[1] - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def state(self, j: int) -> SpectralField:
        return SpectralField(self.states[j])

    @property
    def initial(self) -> SpectralField:
        return self.state(0)

    @property
    def final(self) -> SpectralField:
        return self.state(-1)

    def padded(self, cap: int) -> np.ndarray:
        """States zero-padded or truncated to modes 0..cap."""
        out = np.zeros((self.times.size, cap + 1))
        keep = min(cap, self.cap) + 1
        out[:, :keep] = self.states[:, :keep]
        return out
