"""Build ground-truth problem instances from configuration sections."""
import numpy as np

from fracback.forward import CoefficientSpec, ProblemInstance, SourceTerm, get_nonlinearity
from fracback.spectral import SpectralField
from .config import ProblemConfig


def _source_profile(kind: str, T: float):
    if kind == "decay":
        return lambda t: np.exp(-np.asarray(t, dtype=np.float64))
    if kind == "ramp":
        return lambda t: np.asarray(t, dtype=np.float64) / T
    return lambda t: np.ones_like(np.asarray(t, dtype=np.float64))


def build_instance(problem: ProblemConfig) -> ProblemInstance:
    """Problem instance described by a [problem] section."""
    cap = problem.cap
    source = None
    if problem.source_modes:
        source = SourceTerm(
            spatial=SpectralField.from_modes(problem.source_modes, cap=cap),
            profile=_source_profile(problem.source_profile, problem.T),
        )
    coefficient = CoefficientSpec(
        kind=problem.coefficient,
        base=problem.coefficient_base,
        amplitude=problem.coefficient_amplitude,
        frequency=problem.coefficient_frequency,
    )
    return ProblemInstance(
        beta=problem.beta,
        T=problem.T,
        coefficient=coefficient,
        a0=problem.a0,
        nonlinearity=get_nonlinearity(problem.nonlinearity, problem.nonlinearity_scale),
        initial_state=SpectralField.from_modes(problem.initial_modes, cap=cap),
        source=source,
        name=problem.name,
    )
