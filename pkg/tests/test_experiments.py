"""Monte Carlo experiments with 200 trials per sample count; run with -m slow."""
import math

import numpy as np
import pytest

from fracback.harness import ExperimentConfig, ExperimentRunner
from fracback.quasi_reversibility import data_approx_final, data_approx_source, evaluate_qr_bounds

pytestmark = pytest.mark.slow

MC_SLACK = 3.0


def dominated(row) -> bool:
    return row.mise <= row.bound + MC_SLACK * (row.stderr or 0.0)


def test_first_regularizer_rate_and_estimate():
    config = ExperimentConfig.from_text("""
        problem.beta = 0.55
        problem.T = 0.1
        problem.cap = 16
        problem.nonlinearity = zero
        problem.initial_modes = 1:1.0, 2:0.5, 3:0.25
        problem.source_modes = 1:1.0
        noise.sigma = 0.05
        noise.v_max = 0.1
        noise.vartheta = 0.05
        regularizer.sigma_rate = 0.9
        grid.steps = 100
        run.trials = 200
        run.sweep = 64, 256, 1024
        run.workers = 4
    """)
    result = ExperimentRunner(config).sweep()
    for fit in result.fits:
        assert fit.slope is not None and fit.slope < 0.0
        assert not fit.degenerate
        assert fit.within_band, f"slope {fit.slope} at t={fit.t} outside 50% of {fit.predicted}"
    for estimate in result.estimates:
        assert estimate.assumptions.all_verified
        for row in estimate.rows:
            assert dominated(row), f"MISE {row.mise} above estimate {row.bound} at n={estimate.n}, t={row.t}"


def test_second_regularizer_estimate():
    config = ExperimentConfig.from_text("""
        problem.T = 0.15
        problem.cap = 16
        problem.nonlinearity = sin
        problem.initial_modes = 1:1.0, 2:0.5, 3:0.3, 4:0.2, 5:0.1
        noise.sigma = 0.05
        noise.v_max = 0.1
        regularizer.M_n = 3
        grid.steps = 150
        run.method = second_truncation
        run.n = 64
        run.trials = 200
        run.workers = 4
    """)
    estimate = ExperimentRunner(config).estimate()
    assert all(row.bound is not None and dominated(row) for row in estimate.rows)


def test_quasi_reversibility_initial_time_estimate():
    config = ExperimentConfig.from_text("""
        problem.T = 1.0
        problem.cap = 12
        problem.a0 = 1.5
        problem.nonlinearity = sin
        problem.initial_modes = 1:1.0, 2:0.5
        noise.sigma = 0.05
        noise.v_max = 0.1
        noise.eps = 0.01
        regularizer.M_n = 3
        grid.steps = 200
        run.method = quasi_reversibility
        run.n = 64
        run.trials = 200
        run.workers = 4
    """)
    estimate = ExperimentRunner(config).estimate()
    rows = [row for row in estimate.rows if row.metric == "t_n"]
    assert rows and all(dominated(row) for row in rows)
    l2_rows = [row for row in estimate.rows if row.metric == "l2"]
    assert l2_rows and all(dominated(row) for row in l2_rows)
    h_beta_rows = [row for row in estimate.rows if row.metric == "h_beta" and row.bound is not None]
    assert all(dominated(row) for row in h_beta_rows)
    assert estimate.flagged_trials == []


def test_quasi_reversibility_data_approximation_estimates():
    config = ExperimentConfig.from_text("""
        problem.T = 0.2
        problem.cap = 8
        problem.a0 = 1.5
        problem.nonlinearity = zero
        problem.initial_modes = 1:1.0, 2:0.5
        problem.source_modes = 1:1.0
        noise.sigma = 0.05
        noise.v_max = 0.1
        noise.vartheta = 0.05
        regularizer.M_n = 3
        grid.steps = 50
        run.method = quasi_reversibility
        run.n = 64
    """)
    runner = ExperimentRunner(config)
    n, M, R = 64, 3, 200
    cap = runner.truth.cap
    true_source = runner.instance.source_coefficients(runner.grid, cap)
    final_errors, source_errors = [], []
    for trial in range(R):
        observed = runner.observe(trial, n)
        final = np.zeros(cap + 1)
        final[: M + 1] = data_approx_final(observed.final_samples, M, n).coeffs
        final_errors.append(np.sum((final - runner.truth.final.coeffs) ** 2))
        source = np.zeros_like(true_source)
        source[:, : M + 1] = data_approx_source(observed.source_paths, M, n, runner.grid)
        source_errors.append(np.sum((source - true_source) ** 2, axis=1))
    bounds = evaluate_qr_bounds(runner.truth, runner.instance, runner.qr_params(n, M), runner.noise)

    final_errors = np.array(final_errors)
    final_se = final_errors.std(ddof=1) / math.sqrt(R)
    assert final_errors.mean() <= bounds.data_final_bound + MC_SLACK * final_se

    source_errors = np.array(source_errors)
    source_se = source_errors.std(axis=0, ddof=1) / math.sqrt(R)
    assert np.all(source_errors.mean(axis=0) <= bounds.data_source_bound + MC_SLACK * source_se)


def test_quasi_reversibility_error_decreases_with_samples():
    config = ExperimentConfig.from_text("""
        problem.T = 0.2
        problem.cap = 12
        problem.a0 = 1.5
        problem.nonlinearity = cubic
        problem.initial_modes = 1:1.0, 2:0.5
        problem.coefficient = oscillating
        problem.coefficient_amplitude = 0.1
        noise.sigma = 0.05
        noise.v_max = 0.1
        noise.eps = 0.01
        grid.steps = 100
        run.method = quasi_reversibility
        run.trials = 200
        run.sweep = 64, 256, 1024
        run.workers = 4
    """)
    result = ExperimentRunner(config).sweep()
    half = config.problem.T / 2.0
    mise = [estimate.row(half).mise for estimate in result.estimates]
    assert mise[0] > mise[1] > mise[2]
    assert result.fit(half).slope < 0.0
