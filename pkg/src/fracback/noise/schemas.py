"""Schemas for noisy observations."""
from dataclasses import dataclass

import numpy as np

from fracback.spectral import GridSamples


@dataclass(frozen=True)
class CoefficientObservation:
    """Perturbed coefficient path with its admissibility report."""

    path: np.ndarray
    within_bounds: bool
    b0: float


@dataclass(frozen=True)
class ObservedData:
    """Everything a regularizer may look at for one trial."""

    grid: np.ndarray
    final_samples: GridSamples
    source_paths: np.ndarray
    coefficient: CoefficientObservation

    @property
    def n(self) -> int:
        return self.final_samples.n
