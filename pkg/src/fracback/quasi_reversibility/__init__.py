"""Quasi-reversibility regularizer for randomly perturbed time coefficients."""

from .bounds import evaluate_qr_bounds, smoothness_constant
from .operators import (
    choose_Q_n,
    data_approx_final,
    data_approx_source,
    head_mask,
    head_tail_apply,
    solve_t_n,
)
from .schemas import QRBounds, QRDiagnostics, QRParams, QRSolution
from .solver import QuasiReversibilitySolver, qr_error_at_zero, solve_qr

__all__ = [
    "QRBounds",
    "QRDiagnostics",
    "QRParams",
    "QRSolution",
    "QuasiReversibilitySolver",
    "choose_Q_n",
    "data_approx_final",
    "data_approx_source",
    "evaluate_qr_bounds",
    "head_mask",
    "head_tail_apply",
    "qr_error_at_zero",
    "smoothness_constant",
    "solve_qr",
    "solve_t_n",
]
