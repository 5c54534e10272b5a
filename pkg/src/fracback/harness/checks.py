"""Cross-module invariant suite run by the `check` command."""
import math
import sys
from typing import Callable, List, Optional, Tuple

import numpy as np

from fracback.errors import FracbackError
from fracback.forward import CoefficientSpec, ProblemInstance, forward_solve, get_nonlinearity, mild_residual
from fracback.noise import NoiseSampler, NoiseSpec, observe_final, observe_source
from fracback.quasi_reversibility import QRParams, QuasiReversibilitySolver, head_tail_apply, solve_t_n
from fracback.spectral import (
    GridSamples,
    NormSpec,
    SpectralField,
    aliasing_tail,
    basis_matrix,
    discrete_coefficient,
    discrete_projection,
    frac_laplacian_apply,
    midpoint_nodes,
    mode_rates,
    norm,
    synthesize,
)
from fracback.truncation import TruncationParams, solve_first_regularizer
from .config import ExperimentConfig
from .runner import ExperimentRunner
from .schemas import CheckResult

Check = Callable[[], Tuple[bool, str]]


def _discrete_orthonormality() -> Tuple[bool, str]:
    worst = 0.0
    for n in (4, 8, 16, 64):
        B = basis_matrix(midpoint_nodes(n), n - 1)
        gram = (math.pi / n) * B.T @ B
        worst = max(worst, float(np.max(np.abs(gram - np.eye(n)))))
    return worst <= 1e-12, f"max Gram deviation {worst:.2e}"


def _aliasing_exactness() -> Tuple[bool, str]:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in (4, 8, 16):
        for _ in range(50):
            field = SpectralField(rng.standard_normal(3 * n + 1))
            samples = synthesize(field, n)
            for p in range(n):
                exact = field.coeffs[p] / math.sqrt(math.pi) if p == 0 else field.coeffs[p]
                recovered = discrete_coefficient(samples, p) - aliasing_tail(field, n, p)
                worst = max(worst, abs(exact - recovered))
    return worst <= 1e-9, f"max aliasing mismatch {worst:.2e}"


def _semigroup() -> Tuple[bool, str]:
    field = SpectralField(np.random.default_rng(7).standard_normal(12) / (1.0 + np.arange(12)) ** 3)
    composed = frac_laplacian_apply(frac_laplacian_apply(field, 0.6), 0.9)
    direct = frac_laplacian_apply(field, 1.5)
    scale = float(np.max(np.abs(direct.coeffs)))
    worst = float(np.max(np.abs(composed.coeffs - direct.coeffs))) / scale
    return worst <= 1e-10, f"relative mismatch {worst:.2e}"


def _mild_consistency() -> Tuple[bool, str]:
    instance = ProblemInstance(
        beta=1.0,
        T=0.1,
        coefficient=CoefficientSpec(),
        a0=1.0,
        nonlinearity=get_nonlinearity("sin"),
        initial_state=SpectralField.from_modes({1: 1.0, 2: 0.5}, cap=8),
    )
    trajectory = forward_solve(instance, np.linspace(0.0, 0.1, 2001), 8)
    residual = mild_residual(trajectory, instance)
    return residual <= 1e-6, f"mild residual {residual:.2e}"


def _linear_recovery() -> Tuple[bool, str]:
    T, beta, M, n = 0.1, 1.0, 4, 16
    grid = np.linspace(0.0, T, 101)
    instance = ProblemInstance(
        beta=beta,
        T=T,
        coefficient=CoefficientSpec(),
        a0=1.0,
        nonlinearity=get_nonlinearity("zero"),
        initial_state=SpectralField.from_modes({1: 1.0, 2: 0.5, 4: 0.25}, cap=M),
    )
    truth = forward_solve(instance, grid, M)
    final = synthesize(truth.final, n)
    spec = NoiseSpec()
    observed = NoiseSampler(spec).observe(final, np.zeros((grid.size, n)), np.ones(grid.size), grid, 1.0)
    solution = solve_first_regularizer(observed, instance, TruncationParams(M_n=M, n=n), grid)
    exact = np.exp(np.outer(T - grid, mode_rates(M, beta))) * truth.states[-1]
    worst = float(np.max(np.abs(solution.coefficients - exact)))
    return worst <= 1e-9, f"max deviation from backward propagation {worst:.2e}"


def _head_tail_identity() -> Tuple[bool, str]:
    rng = np.random.default_rng(11)
    worst = 0.0
    for a0, beta, M in ((1.0, 1.0, 3), (1.5, 1.0, 4), (2.0, 0.75, 5), (1.2, 1.5, 2), (3.0, 0.6, 6)):
        params = QRParams(M_n=M, n=64, a0=a0)
        for _ in range(20):
            field = SpectralField(rng.standard_normal(16) * np.exp(-np.arange(16.0)))
            combined = head_tail_apply(field, "tail", params, beta).scaled(a0) + head_tail_apply(
                field, "head", params, beta
            )
            target = frac_laplacian_apply(field, beta).scaled(a0)
            scale = max(1.0, float(np.max(np.abs(target.coeffs))))
            worst = max(worst, float(np.max(np.abs(combined.coeffs - target.coeffs))) / scale)
    return worst <= 1e-12, f"relative decomposition mismatch {worst:.2e}"


def _t_n_device() -> Tuple[bool, str]:
    worst = 0.0
    ok = True
    for M, beta, T in ((10, 1.0, 1.0), (3, 1.0, 1.0), (5, 0.75, 0.5)):
        t_n = solve_t_n(M, beta, T)
        residual = abs(math.exp(-t_n * M**beta) - t_n)
        worst = max(worst, residual)
        ok = ok and 0.0 < t_n < T and t_n <= M ** (-beta / 2.0)
    return ok and worst <= 1e-12, f"max residual {worst:.2e}"


def _noise_streams() -> Tuple[bool, str]:
    grid = np.linspace(0.0, 1.0, 11)
    truth = GridSamples(n=32, values=np.zeros(32))
    first = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, seed=5), trial=3)
    again = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, vartheta=0.5, seed=5), trial=3)
    other = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, seed=5), trial=4)
    paths = observe_source(np.zeros((grid.size, 32)), NoiseSpec(vartheta=1.0, seed=5), grid, trial=3)
    ok = (
        np.array_equal(first.values, again.values)
        and not np.array_equal(first.values, other.values)
        and np.all(paths[0] == 0.0)
    )
    return bool(ok), "final-sample stream independent of the source amplitude"


def _parseval() -> Tuple[bool, str]:
    rng = np.random.default_rng(5)
    worst = 0.0
    for n in (4, 8, 16, 64):
        for _ in range(20):
            field = SpectralField(rng.standard_normal(n))
            recovered = discrete_projection(synthesize(field, n).values, n, n - 1)
            worst = max(worst, abs(float(np.linalg.norm(recovered)) - norm(field, NormSpec.l2())))
    return worst <= 1e-10, f"max norm change {worst:.2e}"


def _norm_monotonicity() -> Tuple[bool, str]:
    rng = np.random.default_rng(13)
    ok = True
    for _ in range(50):
        coeffs = rng.standard_normal(12)
        coeffs[0] = 0.0
        field = SpectralField(coeffs)
        values = [norm(field, NormSpec.l2())] + [norm(field, NormSpec.h_gamma(g)) for g in (0.25, 0.5, 1.0, 1.5)]
        ok = ok and all(b >= a * (1.0 - 1e-12) for a, b in zip(values, values[1:]))
    return ok, "L2 <= H^gamma, nondecreasing in gamma, on mean-free fields"


def _qr_fixed_point() -> Tuple[bool, str]:
    T, n = 0.2, 16
    grid = np.linspace(0.0, T, 101)
    instance = ProblemInstance(
        beta=1.0,
        T=T,
        coefficient=CoefficientSpec(),
        a0=1.5,
        nonlinearity=get_nonlinearity("sin"),
        initial_state=SpectralField.from_modes({1: 1.0}, cap=8),
    )
    final = synthesize(SpectralField.from_modes({1: 0.5, 2: 0.3, 3: 0.4, 4: 0.2}, cap=8), n)
    observed = NoiseSampler(NoiseSpec(eps=0.01, seed=3)).observe(
        final, np.zeros((grid.size, n)), np.ones(grid.size), grid, 1.5
    )
    solver = QuasiReversibilitySolver(instance, QRParams(M_n=4, n=n, a0=1.5), grid, cap=8)
    defect = solver.defect(solver.solve(observed), observed)
    return defect <= 1e-8, f"mild-equation defect {defect:.2e}"


def _trial_determinism(config: ExperimentConfig) -> Check:
    def check() -> Tuple[bool, str]:
        single = config.with_overrides(**{"run.trials": 1})
        first = ExperimentRunner(single).run_trial(0)
        second = ExperimentRunner(single).run_trial(0)
        return first == second, f"trial 0 errors {first.l2_errors}"
    return check


CHECKS: List[Tuple[str, Check]] = [
    ("discrete_orthonormality", _discrete_orthonormality),
    ("aliasing_exactness", _aliasing_exactness),
    ("fractional_semigroup", _semigroup),
    ("mild_consistency", _mild_consistency),
    ("linear_recovery", _linear_recovery),
    ("head_tail_identity", _head_tail_identity),
    ("t_n_device", _t_n_device),
    ("noise_streams", _noise_streams),
    ("parseval", _parseval),
    ("norm_monotonicity", _norm_monotonicity),
    ("qr_fixed_point", _qr_fixed_point),
]


def run_checks(config: Optional[ExperimentConfig] = None) -> List[CheckResult]:
    """Run every invariant check; with a config, also its trial determinism."""
    checks = list(CHECKS)
    if config is not None:
        checks.append(("trial_determinism", _trial_determinism(config)))
    results = []
    for name, check in checks:
        try:
            passed, detail = check()
        except FracbackError as e:
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        level = "INFO" if passed else "ERROR"
        print(f"[{level}] check {name}: {'passed' if passed else 'FAILED'} ({detail})", file=sys.stderr)
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    return results
