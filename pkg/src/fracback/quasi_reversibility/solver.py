"""Mild-solution solver for the quasi-reversibility problem."""
import math
import sys

import numpy as np

from fracback.errors import NumericalFailure, ParameterValidationError
from fracback.forward import ProblemInstance, PseudospectralMap
from fracback.noise import ObservedData
from fracback.picard import picard_iterate
from fracback.spectral import NormSpec, SpectralField, mode_rates, norm
from fracback.spectral.kernels import forward_duhamel, grid_steps
from fracback.truncation import check_amplification, clamp_nonlinearity
from .operators import data_approx_final, data_approx_source, head_mask, solve_t_n
from .schemas import QRDiagnostics, QRParams, QRSolution


class QuasiReversibilitySolver:
    """Solves W_t + a-bar A^beta W - a0 R(W) = F_Q(W) + g-bar, W(T) = w-bar.

    In reversed time tau = T - t each mode obeys W' = kappa_p W - N_p with
    kappa_p = a-bar p^{2 beta} on head modes and (a-bar - a0) p^{2 beta} on
    tail modes.
    """

    def __init__(self, instance: ProblemInstance, params: QRParams, grid: np.ndarray, cap: int):
        if cap < params.M_n:
            raise ParameterValidationError(f"cap {cap} below the cutoff M_n={params.M_n}")
        self.instance = instance
        self.params = params
        self.cap = cap
        self.grid = np.asarray(grid, dtype=np.float64)
        self.steps = grid_steps(self.grid)
        if not np.isclose(self.grid[-1], instance.T, rtol=0.0, atol=1e-12):
            raise ParameterValidationError(f"time grid ends at {self.grid[-1]}, expected T={instance.T}")
        check_amplification(instance.T * params.M_n ** (2.0 * instance.beta), "quasi-reversibility")
        self.threshold = params.tail_threshold(instance.beta)
        self.head = head_mask(cap, self.threshold)
        self.nonlinear = PseudospectralMap(clamp_nonlinearity(instance.nonlinearity, params.Q_n), cap)

    def _reversed_exponents(self, coefficient_path: np.ndarray) -> np.ndarray:
        """int kappa_p over each reversed step, shape (m, cap+1)."""
        path = coefficient_path[::-1]
        steps = self.steps[::-1]
        a_steps = 0.5 * steps * (path[:-1] + path[1:])
        rates = mode_rates(self.cap, self.instance.beta)
        shift = np.where(self.head, 0.0, self.params.a0)
        return np.outer(a_steps, rates) - np.outer(steps, shift * rates)

    def solve(self, observed: ObservedData) -> QRSolution:
        M, n = self.params.M_n, self.params.n
        print(
            f"[INFO] quasi-reversibility: n={n}, M_n={M}, p*={self.threshold:.4g}, Q_n={self.params.Q_n:g}",
            file=sys.stderr,
        )
        final = data_approx_final(observed.final_samples, M, n).padded(self.cap).coeffs
        source = np.zeros((self.grid.size, self.cap + 1))
        source[:, : M + 1] = data_approx_source(observed.source_paths, M, n, self.grid)
        source = source[::-1]

        exponents = self._reversed_exponents(observed.coefficient.path)
        steps = self.steps[::-1]
        with np.errstate(over="ignore"):
            homogeneous = np.exp(np.vstack([np.zeros(self.cap + 1), np.cumsum(exponents, axis=0)])) * final
        if not np.all(np.isfinite(homogeneous)):
            error_msg = "quasi-reversibility propagator left floating range"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise NumericalFailure(error_msg)

        def update(state: np.ndarray) -> np.ndarray:
            return homogeneous - forward_duhamel(exponents, steps, self.nonlinear(state) + source)

        initial = homogeneous - forward_duhamel(exponents, steps, source)
        result = picard_iterate(
            update,
            initial,
            tol=self.params.picard_tol,
            max_iters=self.params.picard_max_iters,
            label="quasi-reversibility",
        )

        t_n = None
        if M**self.instance.beta > math.log(1.0 / self.instance.T) / self.instance.T:
            t_n = solve_t_n(M, self.instance.beta, self.instance.T)
        else:
            print("[INFO] t_n undefined: M_n^beta below log(1/T)/T", file=sys.stderr)

        diagnostics = QRDiagnostics(
            **result.diagnostics.model_dump(),
            threshold=self.threshold,
            coefficient_within_bounds=observed.coefficient.within_bounds,
            b0=observed.coefficient.b0,
        )
        return QRSolution(times=self.grid, coefficients=result.solution[::-1].copy(), t_n=t_n,
                          diagnostics=diagnostics)

    def defect(self, solution: QRSolution, observed: ObservedData) -> float:
        """Sup-over-grid gap between W and its mild right-hand side."""
        M, n = self.params.M_n, self.params.n
        final = data_approx_final(observed.final_samples, M, n).padded(self.cap).coeffs
        source = np.zeros((self.grid.size, self.cap + 1))
        source[:, : M + 1] = data_approx_source(observed.source_paths, M, n, self.grid)
        exponents = self._reversed_exponents(observed.coefficient.path)
        homogeneous = np.exp(np.vstack([np.zeros(self.cap + 1), np.cumsum(exponents, axis=0)])) * final
        reversed_state = solution.coefficients[::-1]
        rhs = homogeneous - forward_duhamel(
            exponents, self.steps[::-1], self.nonlinear(reversed_state) + source[::-1]
        )
        return float(np.max(np.linalg.norm(rhs - reversed_state, axis=1)))


def solve_qr(observed: ObservedData, instance: ProblemInstance, params: QRParams, grid: np.ndarray,
             cap: int) -> QRSolution:
    return QuasiReversibilitySolver(instance, params, grid, cap).solve(observed)


def qr_error_at_zero(solution: QRSolution, u0: SpectralField) -> float:
    """||W(t_n) - u(0)||_{L2}."""
    if solution.t_n is None:
        raise ParameterValidationError("t_n is undefined for this solution")
    cap = max(solution.cap, u0.cap)
    return norm(solution.state_at(solution.t_n).padded(cap) - u0.padded(cap), NormSpec.l2())
