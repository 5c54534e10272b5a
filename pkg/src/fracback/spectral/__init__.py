"""Cosine eigenbasis of the Neumann Laplacian on (0, pi)."""

from .basis import (
    MidpointTransform,
    aliasing_tail,
    basis_matrix,
    discrete_coefficient,
    discrete_projection,
    eigenfunction_value,
    midpoint_nodes,
    synthesize,
)
from .operators import frac_laplacian_apply, mode_rates, norm, squared_norms
from .schemas import GridSamples, NormSpec, SpectralField

__all__ = [
    "GridSamples",
    "MidpointTransform",
    "NormSpec",
    "SpectralField",
    "aliasing_tail",
    "basis_matrix",
    "discrete_coefficient",
    "discrete_projection",
    "eigenfunction_value",
    "frac_laplacian_apply",
    "midpoint_nodes",
    "mode_rates",
    "norm",
    "squared_norms",
    "synthesize",
]
