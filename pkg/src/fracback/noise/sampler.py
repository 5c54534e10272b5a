"""Seed-reproducible random observations."""
import sys
from enum import IntEnum

import numpy as np

from fracback.errors import ParameterValidationError
from fracback.spectral import GridSamples
from fracback.spectral.kernels import grid_steps
from .config import NoiseSpec
from .schemas import CoefficientObservation, ObservedData


class Purpose(IntEnum):
    """Sub-stream tags; each purpose draws from its own stream."""
    FINAL = 1
    SOURCE = 2
    COEFFICIENT = 3


def noise_stream(seed: int, purpose: Purpose, trial: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, purpose, trial).

    Draws inside a stream are consumed in node-major order, so node k of a
    trial always maps to the same counter position. Normals use numpy's
    ziggurat sampler.
    """
    key = np.random.SeedSequence(seed, spawn_key=(int(purpose), int(trial)))
    return np.random.Generator(np.random.Philox(key))


def brownian_paths(rng: np.random.Generator, grid: np.ndarray, count: int) -> np.ndarray:
    """count independent Brownian paths on the grid, shape (m+1, count), starting at 0."""
    steps = grid_steps(grid)
    increments = rng.standard_normal((steps.size, count)) * np.sqrt(steps)[:, None]
    paths = np.zeros((grid.size, count))
    np.cumsum(increments, axis=0, out=paths[1:])
    return paths


class NoiseSampler:
    """Adds the observation noise of a NoiseSpec to true data."""

    def __init__(self, spec: NoiseSpec):
        self.spec = spec

    def observe_final(self, true_samples: GridSamples, trial: int = 0) -> GridSamples:
        """Final samples plus sigma_k times standard normals."""
        sigma = self.spec.sigma_for(true_samples.n)
        if not np.any(sigma):
            return true_samples
        rng = noise_stream(self.spec.seed, Purpose.FINAL, trial)
        errors = rng.standard_normal(true_samples.n)
        return GridSamples(n=true_samples.n, values=true_samples.values + sigma * errors)

    def observe_source(self, true_source_samples: np.ndarray, grid: np.ndarray, trial: int = 0) -> np.ndarray:
        """Source samples plus vartheta times Brownian paths, one per node."""
        true_source_samples = np.asarray(true_source_samples, dtype=np.float64)
        grid = np.asarray(grid, dtype=np.float64)
        if true_source_samples.shape[0] != grid.size:
            raise ParameterValidationError(
                f"source samples cover {true_source_samples.shape[0]} times, grid has {grid.size}"
            )
        if self.spec.vartheta == 0.0:
            return true_source_samples.copy()
        rng = noise_stream(self.spec.seed, Purpose.SOURCE, trial)
        paths = brownian_paths(rng, grid, true_source_samples.shape[1])
        return true_source_samples + self.spec.vartheta * paths

    def observe_coefficient(self, a_samples: np.ndarray, grid: np.ndarray, a0: float,
                            trial: int = 0) -> CoefficientObservation:
        a_samples = np.asarray(a_samples, dtype=np.float64)
        if self.spec.eps == 0.0:
            path = a_samples.copy()
        else:
            rng = noise_stream(self.spec.seed, Purpose.COEFFICIENT, trial)
            path = a_samples + self.spec.eps * brownian_paths(rng, np.asarray(grid), 1)[:, 0]
        within = bool(np.all(path > 0.0) and np.all(path <= a0))
        b0 = float(np.min(a0 - path))
        if not within:
            print(
                f"[WARNING] trial {trial}: perturbed coefficient leaves (0, a0={a0}], b0={b0:.4g}",
                file=sys.stderr,
            )
        return CoefficientObservation(path=path, within_bounds=within, b0=b0)

    def observe(self, true_final: GridSamples, true_source_samples: np.ndarray, a_samples: np.ndarray,
                grid: np.ndarray, a0: float, trial: int = 0) -> ObservedData:
        """Noisy final samples, source paths and coefficient path for one trial."""
        return ObservedData(
            grid=np.asarray(grid, dtype=np.float64),
            final_samples=self.observe_final(true_final, trial),
            source_paths=self.observe_source(true_source_samples, grid, trial),
            coefficient=self.observe_coefficient(a_samples, grid, a0, trial),
        )


def observe_final(true_samples: GridSamples, spec: NoiseSpec, trial: int = 0) -> GridSamples:
    """u_T(x_k) + sigma_k eps_k with eps_k ~ N(0, 1)."""
    return NoiseSampler(spec).observe_final(true_samples, trial)


def observe_source(true_source_samples: np.ndarray, spec: NoiseSpec, grid: np.ndarray,
                   trial: int = 0) -> np.ndarray:
    """g(x_k, t_j) + vartheta xi_k(t_j) with independent Brownian xi_k."""
    return NoiseSampler(spec).observe_source(true_source_samples, grid, trial)


def observe_coefficient(a_samples: np.ndarray, spec: NoiseSpec, grid: np.ndarray, a0: float,
                        trial: int = 0) -> CoefficientObservation:
    """a(t_j) + eps xi(t_j) along one Brownian path."""
    return NoiseSampler(spec).observe_coefficient(a_samples, grid, a0, trial)
