"""Configuration of the observation noise."""
from typing import List, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fracback.errors import ParameterValidationError


class NoiseSpec(BaseModel):
    """Noise levels for final samples, source paths and the time coefficient."""
    sigma: Union[float, List[float]] = Field(
        default=0.0, description="Per-node standard deviation sigma_k (scalar broadcasts)"
    )
    v_max: float = Field(default=1.0, gt=0.0, description="Declared bound V_max on every sigma_k")
    vartheta: float = Field(default=0.0, ge=0.0, description="Source noise amplitude")
    eps: float = Field(default=0.0, ge=0.0, description="Coefficient noise amplitude")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master reproducibility seed")

    @model_validator(mode="after")
    def check_bounds(self) -> "NoiseSpec":
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=np.float64))
        if np.any(sigma < 0) or np.any(sigma >= self.v_max):
            raise ValueError(f"every sigma_k must lie in [0, v_max={self.v_max})")
        return self

    def sigma_for(self, n: int) -> np.ndarray:
        """Per-node standard deviations for n samples."""
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if sigma.ndim == 0:
            sigma = np.full(n, float(sigma))
        if sigma.size != n:
            raise ParameterValidationError(f"noise spec lists {sigma.size} node deviations, data has {n}")
        if np.any(sigma >= self.v_max):
            raise ParameterValidationError(f"sigma_k must stay below v_max={self.v_max}")
        return sigma

    @property
    def noise_free(self) -> bool:
        return not np.any(np.asarray(self.sigma)) and self.vartheta == 0.0 and self.eps == 0.0
