"""Schemas for the Fourier-truncation regularizers."""
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fracback.picard import PicardDiagnostics
from fracback.spectral import SpectralField


class TruncationParams(BaseModel):
    """Cutoff and iteration controls for the truncation regularizers."""
    M_n: int = Field(..., ge=1, description="Mode cutoff")
    n: int = Field(..., ge=2, description="Number of spatial samples")
    sigma_rate: float = Field(default=0.9, gt=0.0, lt=1.0, description="Rate exponent sigma")
    picard_tol: float = Field(default=1e-10, gt=0.0, description="Stopping tolerance of the fixed-point sweep")
    picard_max_iters: int = Field(default=200, ge=1, description="Iteration cap")
    clamp_level: Optional[float] = Field(
        default=None, gt=0.0, description="Clamp level Q_n for locally Lipschitz F"
    )

    @model_validator(mode="after")
    def check_cutoff(self) -> "TruncationParams":
        if self.M_n >= self.n:
            raise ValueError(f"cutoff M_n={self.M_n} must be below n={self.n}")
        return self

    def noise_amplification(self, T: float, beta: float) -> float:
        """(M_n + 1) e^{2 T M_n^{2 beta}} / n."""
        return (self.M_n + 1) * float(np.exp(2.0 * T * self.M_n ** (2.0 * beta))) / self.n


@dataclass(frozen=True)
class RegularizedSolution:
    """Regularized coefficients on the time grid."""

    method: Literal["first", "second"]
    times: np.ndarray
    coefficients: np.ndarray
    diagnostics: PicardDiagnostics

    @property
    def cap(self) -> int:
        return self.coefficients.shape[1] - 1

    def state(self, j: int) -> SpectralField:
        return SpectralField(self.coefficients[j])


class TruncationBound(BaseModel):
    """Right-hand side of an error estimate evaluated on the grid."""
    variant: str = Field(..., description="Which estimate was evaluated")
    times: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)
    constants: Dict[str, float] = Field(default_factory=dict)
    assumption_verified: bool = Field(default=True)
