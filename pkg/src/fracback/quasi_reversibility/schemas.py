"""Schemas for the quasi-reversibility regularizer."""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fracback.picard import PicardDiagnostics
from fracback.spectral import SpectralField


class QRParams(BaseModel):
    """Cutoff, clamp level and coefficient bounds for the QR solver."""
    M_n: int = Field(..., ge=1, description="Mode cutoff")
    n: int = Field(..., ge=2, description="Number of spatial samples")
    Q_n: float = Field(default=math.inf, gt=0.0, description="Clamp level; inf disables clamping")
    a0: float = Field(..., gt=0.0, description="Upper bound of the coefficient")
    b0: Optional[float] = Field(default=None, description="Realized min of a0 - a-bar")
    picard_tol: float = Field(default=1e-10, gt=0.0)
    picard_max_iters: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def check_cutoff(self) -> "QRParams":
        if self.M_n >= self.n:
            raise ValueError(f"cutoff M_n={self.M_n} must be below n={self.n}")
        return self

    def tail_threshold(self, beta: float) -> float:
        """p* = M_n a0^{-1/(2 beta)}."""
        return self.M_n * self.a0 ** (-1.0 / (2.0 * beta))


class QRDiagnostics(PicardDiagnostics):
    threshold: float = Field(..., description="Head/tail threshold p*")
    coefficient_within_bounds: bool = Field(default=True)
    b0: float = Field(..., description="Realized min of a0 - a-bar over the grid")


@dataclass(frozen=True)
class QRSolution:
    """Regularized coefficients W(t_j) on the forward-oriented time grid."""

    times: np.ndarray
    coefficients: np.ndarray
    t_n: Optional[float]
    diagnostics: QRDiagnostics

    @property
    def cap(self) -> int:
        return self.coefficients.shape[1] - 1

    def state_at(self, t: float) -> SpectralField:
        """W(t), linearly interpolated between grid nodes."""
        values = [np.interp(t, self.times, self.coefficients[:, p]) for p in range(self.cap + 1)]
        return SpectralField(np.array(values))


class QRBounds(BaseModel):
    """Error functionals and their per-time estimates."""
    phi: float = Field(..., description="L2 functional")
    pi: Optional[float] = Field(default=None, description="H^beta functional; None when b0 <= 0")
    times: List[float] = Field(default_factory=list)
    l2_bound: List[float] = Field(default_factory=list)
    h_beta_bound: Optional[List[float]] = Field(default=None)
    initial_time_bound: float = Field(..., description="Estimate for E||W(t_n) - u(0)||^2")
    data_final_bound: float = Field(..., description="Estimate for E||w-bar - u_T||^2")
    data_source_bound: float = Field(..., description="Estimate for E||g-bar(t) - g(t)||^2")
    constants: Dict[str, float] = Field(default_factory=dict)
    exponent_note: str = Field(
        default="L2 estimate decays like exp(-2 t M^beta), H^beta estimate like exp(-2 t M^{2 beta})"
    )
