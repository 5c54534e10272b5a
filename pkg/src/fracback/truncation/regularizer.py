"""First and second Fourier-truncation regularizers (constant coefficient a = 1)."""
import sys
from typing import Callable

import numpy as np

from fracback.errors import ParameterValidationError
from fracback.forward import ProblemInstance, PseudospectralMap
from fracback.noise import ObservedData
from fracback.picard import picard_iterate
from fracback.spectral import GridSamples, mode_rates
from fracback.spectral.kernels import backward_duhamel, forward_duhamel, grid_steps
from .operators import check_amplification, clamp_nonlinearity, phi_data_path, phi_source_path
from .schemas import RegularizedSolution, TruncationParams


class TruncationRegularizer:
    """Picard solvers for the truncated backward integral equations."""

    def __init__(self, instance: ProblemInstance, params: TruncationParams, grid: np.ndarray):
        if not instance.coefficient.is_unit():
            error_msg = "truncation regularizers assume the constant coefficient a = 1"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)
        self.instance = instance
        self.params = params
        self.grid = np.asarray(grid, dtype=np.float64)
        self.steps = grid_steps(self.grid)
        if not np.isclose(self.grid[-1], instance.T, rtol=0.0, atol=1e-12):
            raise ParameterValidationError(f"time grid ends at {self.grid[-1]}, expected T={instance.T}")
        check_amplification(instance.T * params.M_n ** (2.0 * instance.beta), "truncation regularizer")
        self.nonlinearity = instance.nonlinearity
        if params.clamp_level is not None:
            self.nonlinearity = clamp_nonlinearity(instance.nonlinearity, params.clamp_level)

    def _first_map(self, observed: ObservedData) -> tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]]:
        M, beta = self.params.M_n, self.instance.beta
        data = phi_data_path(observed.final_samples, M, self.grid, beta, self.instance.T)
        data = data - phi_source_path(observed.source_paths, M, self.grid, beta)
        exponents = np.outer(self.steps, mode_rates(M, beta))
        nonlinear = PseudospectralMap(self.nonlinearity, M)

        def update(state: np.ndarray) -> np.ndarray:
            return data - backward_duhamel(exponents, self.steps, nonlinear(state))

        return data, update

    def solve_first(self, observed: ObservedData) -> RegularizedSolution:
        """Fixed point of U = Phi(u_T) - Phi~(g) - sum_{p<=M} int_t^T e^{(s-t)p^{2b}} F_p(U) ds phi_p."""
        print(
            f"[INFO] first regularizer: n={self.params.n}, M_n={self.params.M_n}, "
            f"F={self.nonlinearity.name}",
            file=sys.stderr,
        )
        initial, update = self._first_map(observed)
        result = picard_iterate(
            update,
            initial,
            tol=self.params.picard_tol,
            max_iters=self.params.picard_max_iters,
            label="first regularizer",
        )
        return RegularizedSolution(
            method="first", times=self.grid, coefficients=result.solution, diagnostics=result.diagnostics
        )

    def first_defect(self, solution: RegularizedSolution, observed: ObservedData) -> float:
        """Sup-over-grid L2 gap between U and the right-hand side evaluated at U."""
        _, update = self._first_map(observed)
        return float(np.max(np.linalg.norm(update(solution.coefficients) - solution.coefficients, axis=1)))

    def _check_second_preconditions(self, cap: int) -> None:
        K, T = self.instance.nonlinearity.lipschitz, self.instance.T
        if self.instance.has_source:
            error_msg = "second regularizer requires a zero source"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)
        if not 5.0 * K * T < 1.0:
            error_msg = f"second regularizer requires 5KT < 1, got 5KT = {5.0 * K * T:.4g}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)
        if cap < self.params.M_n:
            raise ParameterValidationError(f"cap {cap} below the cutoff M_n={self.params.M_n}")

    def solve_second(self, final_samples: GridSamples, cap: int) -> RegularizedSolution:
        """Fixed point with backward head modes and forward-integrated tail modes.

        Increments are measured in the weighted norm sup_t e^{t M^{2 beta}} ||.||.
        """
        self._check_second_preconditions(cap)
        M, beta, T = self.params.M_n, self.instance.beta, self.instance.T
        print(f"[INFO] second regularizer: n={self.params.n}, M_n={M}, cap={cap}", file=sys.stderr)

        rates = mode_rates(cap, beta)
        head = slice(0, M + 1)
        tail = slice(M + 1, cap + 1)
        data = np.zeros((self.grid.size, cap + 1))
        data[:, head] = phi_data_path(final_samples, M, self.grid, beta, T)
        head_exponents = np.outer(self.steps, rates[head])
        tail_exponents = -np.outer(self.steps, rates[tail])
        nonlinear = PseudospectralMap(self.instance.nonlinearity, cap)
        weights = np.exp(self.grid * M ** (2.0 * beta))

        def update(state: np.ndarray) -> np.ndarray:
            forcing = nonlinear(state)
            out = data.copy()
            out[:, head] -= backward_duhamel(head_exponents, self.steps, forcing[:, head])
            out[:, tail] += forward_duhamel(tail_exponents, self.steps, forcing[:, tail])
            return out

        def bielecki(difference: np.ndarray) -> float:
            return float(np.max(weights * np.linalg.norm(difference, axis=1)))

        result = picard_iterate(
            update,
            data,
            tol=self.params.picard_tol,
            max_iters=self.params.picard_max_iters,
            measure=bielecki,
            label="second regularizer",
        )
        return RegularizedSolution(
            method="second", times=self.grid, coefficients=result.solution, diagnostics=result.diagnostics
        )


def solve_first_regularizer(observed: ObservedData, instance: ProblemInstance, params: TruncationParams,
                            grid: np.ndarray) -> RegularizedSolution:
    return TruncationRegularizer(instance, params, grid).solve_first(observed)


def solve_second_regularizer(final_samples: GridSamples, instance: ProblemInstance, params: TruncationParams,
                             grid: np.ndarray, cap: int) -> RegularizedSolution:
    return TruncationRegularizer(instance, params, grid).solve_second(final_samples, cap)
