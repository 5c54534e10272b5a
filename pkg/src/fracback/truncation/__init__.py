"""Fourier-truncation regularizers for the constant-coefficient backward problem."""

from .bounds import (
    BudgetEstimate,
    ass1_budget,
    ass2_budget,
    evaluate_second_bound,
    evaluate_truncation_bound,
    gevrey_budget,
    source_budget,
    truncation_constants,
)
from .operators import (
    check_amplification,
    choose_M_n,
    clamp_nonlinearity,
    phi_data,
    phi_data_path,
    phi_source,
    phi_source_path,
)
from .regularizer import TruncationRegularizer, solve_first_regularizer, solve_second_regularizer
from .schemas import RegularizedSolution, TruncationBound, TruncationParams

__all__ = [
    "BudgetEstimate",
    "RegularizedSolution",
    "TruncationBound",
    "TruncationParams",
    "TruncationRegularizer",
    "ass1_budget",
    "ass2_budget",
    "check_amplification",
    "choose_M_n",
    "clamp_nonlinearity",
    "evaluate_second_bound",
    "evaluate_truncation_bound",
    "gevrey_budget",
    "phi_data",
    "phi_data_path",
    "phi_source",
    "phi_source_path",
    "solve_first_regularizer",
    "solve_second_regularizer",
    "source_budget",
    "truncation_constants",
]
