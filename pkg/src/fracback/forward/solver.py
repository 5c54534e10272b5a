"""Forward solver for the well-posed initial-value problem."""
import sys
from typing import Optional

import numpy as np

from fracback.errors import ConvergenceError, ParameterValidationError
from fracback.spectral import mode_rates
from fracback.spectral.kernels import backward_duhamel, grid_steps
from .nonlinearity import PseudospectralMap
from .schemas import ProblemInstance, Trajectory

# exp(700) is the largest amplification kept in floating range
MAX_EXPONENT = 700.0


def _phi_functions(z: np.ndarray, h: float):
    """h*phi1(z) and h*phi2(z) for the decay exponent z >= 0."""
    small = z < 1e-4
    safe = np.where(small, 1.0, z)
    phi1 = np.where(small, 1.0 - z / 2.0 + z * z / 6.0, -np.expm1(-safe) / safe)
    phi2 = np.where(small, 0.5 - z / 6.0 + z * z / 24.0, (safe - 1.0 + np.exp(-safe)) / (safe * safe))
    return h * phi1, h * phi2


class ForwardSolver:
    """Exponential integrator per mode with a Heun-type correction.

    The linear decay a(t) p^(2 beta) is integrated exactly across each step;
    F(u) + g enters through the first and second phi-functions.
    """

    def __init__(self, instance: ProblemInstance, cap: int):
        if cap < instance.initial_state.cap:
            print(
                f"[WARNING] cap {cap} truncates the initial state (cap {instance.initial_state.cap})",
                file=sys.stderr,
            )
        self.instance = instance
        self.cap = cap
        self.rates = mode_rates(cap, instance.beta)
        self.nonlinear = PseudospectralMap(instance.nonlinearity, cap)

    def _validate_grid(self, grid: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid, dtype=np.float64)
        grid_steps(grid)
        if not np.isclose(grid[-1], self.instance.T, rtol=0.0, atol=1e-12):
            raise ParameterValidationError(f"time grid ends at {grid[-1]}, expected T={self.instance.T}")
        return grid

    def _forcing(self, state: np.ndarray, t: float) -> np.ndarray:
        return self.nonlinear(state) + self.instance.source_coefficients(np.array([t]), self.cap)[0]

    def solve(self, grid: np.ndarray) -> Trajectory:
        grid = self._validate_grid(grid)
        coefficient_steps = self.instance.coefficient.step_integrals(grid)
        states = np.zeros((grid.size, self.cap + 1))
        states[0] = self.instance.initial_state.padded(self.cap).coeffs

        forcing = self._forcing(states[0], grid[0])
        for j in range(grid.size - 1):
            h = grid[j + 1] - grid[j]
            z = self.rates * coefficient_steps[j]
            decay = np.exp(-z)
            phi1, phi2 = _phi_functions(z, h)
            predictor = decay * states[j] + phi1 * forcing
            next_forcing = self._forcing(predictor, grid[j + 1])
            states[j + 1] = predictor + phi2 * (next_forcing - forcing)
            forcing = self._forcing(states[j + 1], grid[j + 1])
        return Trajectory(times=grid, states=states)

    def residual(self, trajectory: Trajectory) -> float:
        """Largest L2 mismatch with the backward mild representation."""
        instance = self.instance
        if not instance.coefficient.is_unit():
            error_msg = "mild representation requires the constant coefficient a = 1"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)

        times = trajectory.times
        steps = grid_steps(times)
        cap = trajectory.cap
        rates = mode_rates(cap, instance.beta)
        forcing = PseudospectralMap(instance.nonlinearity, cap)(trajectory.states)
        forcing = forcing + instance.source_coefficients(times, cap)

        exponents = (trajectory.T - times)[:, None] * rates[None, :]
        included = exponents <= MAX_EXPONENT
        with np.errstate(over="ignore", invalid="ignore"):
            integral = backward_duhamel(np.outer(steps, rates), steps, forcing)
            rhs = np.exp(np.where(included, exponents, 0.0)) * trajectory.states[-1] - integral
            mismatch = np.where(included, trajectory.states - rhs, 0.0)

        excluded = int(np.count_nonzero(~included))
        if excluded:
            print(
                f"[INFO] mild residual excluded {excluded} (time, mode) pairs with exponent > {MAX_EXPONENT:g}",
                file=sys.stderr,
            )
        return float(np.max(np.linalg.norm(mismatch, axis=1)))


def refine_grid(grid: np.ndarray) -> np.ndarray:
    """Insert the midpoint of every step."""
    refined = np.empty(2 * grid.size - 1)
    refined[0::2] = grid
    refined[1::2] = 0.5 * (grid[:-1] + grid[1:])
    return refined


def forward_solve(
    instance: ProblemInstance,
    grid: np.ndarray,
    cap: int,
    tolerance: Optional[float] = None,
) -> Trajectory:
    """Solve the forward problem on the grid.

    With a tolerance, the solve is repeated on the midpoint-refined grid and
    the change in u(T) must stay within it.
    """
    solver = ForwardSolver(instance, cap)
    trajectory = solver.solve(grid)
    if tolerance is not None:
        refined = solver.solve(refine_grid(trajectory.times))
        change = float(np.linalg.norm(refined.states[-1] - trajectory.states[-1]))
        if change > tolerance:
            error_msg = f"forward solve not stabilized: step halving changed u(T) by {change:.3e}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ConvergenceError(error_msg, iterations=1)
        print(f"[INFO] forward solve stable under refinement (change {change:.3e})", file=sys.stderr)
    return trajectory


def mild_residual(trajectory: Trajectory, instance: ProblemInstance) -> float:
    """Max over grid times of the L2 gap to the backward mild representation."""
    return ForwardSolver(instance, trajectory.cap).residual(trajectory)
