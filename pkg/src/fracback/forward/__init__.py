"""Ground-truth problem instances and the forward solver."""

from .export import write_trajectory_csv
from .nonlinearity import Nonlinearity, PseudospectralMap, get_nonlinearity, nonlinearity_catalog
from .schemas import CoefficientSpec, ProblemInstance, SourceTerm, Trajectory
from .solver import ForwardSolver, forward_solve, mild_residual, refine_grid

__all__ = [
    "CoefficientSpec",
    "ForwardSolver",
    "Nonlinearity",
    "ProblemInstance",
    "PseudospectralMap",
    "SourceTerm",
    "Trajectory",
    "forward_solve",
    "get_nonlinearity",
    "mild_residual",
    "nonlinearity_catalog",
    "refine_grid",
    "write_trajectory_csv",
]
