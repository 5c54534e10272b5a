"""Random observation model for final values, sources and the coefficient."""

from .config import NoiseSpec
from .export import write_observed_csv
from .sampler import (
    NoiseSampler,
    Purpose,
    brownian_paths,
    noise_stream,
    observe_coefficient,
    observe_final,
    observe_source,
)
from .schemas import CoefficientObservation, ObservedData

__all__ = [
    "CoefficientObservation",
    "NoiseSampler",
    "NoiseSpec",
    "ObservedData",
    "Purpose",
    "brownian_paths",
    "noise_stream",
    "observe_coefficient",
    "observe_final",
    "observe_source",
    "write_observed_csv",
]
