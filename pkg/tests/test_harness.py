import math

import numpy as np
import pytest
from pydantic import ValidationError

from fracback.errors import ConvergenceError, ParameterValidationError
from fracback.forward import forward_solve
from fracback.harness import (
    ExperimentConfig,
    ExperimentRunner,
    SmoothnessAssumptions,
    build_instance,
    estimate_mise,
    run_checks,
    verify_assumptions,
    write_mise_csv,
    write_sweep_csv,
    write_trials_csv,
)

BASE = """
# linear test problem
problem.T = 0.1
problem.cap = 8
problem.nonlinearity = zero
problem.initial_modes = 1:1.0, 2:0.5
grid.steps = 100
run.n = 32
run.trials = 3
"""


def make_config(*extra: str) -> ExperimentConfig:
    return ExperimentConfig.from_text(BASE + "\n".join(extra))


def test_config_parsing():
    config = make_config("problem.initial_modes = 1:1.0, 3:0.5  # two modes", "run.sweep = 16, 32, 64")
    assert config.problem.initial_modes == {1: 1.0, 3: 0.5}
    assert config.run.sweep == [16, 32, 64]
    assert config.eval_times == [0.05, 0.1]
    assert config.time_grid().size == 101
    assert config.noise_spec().seed == 0


def test_config_rejects_bad_input():
    with pytest.raises(ParameterValidationError):
        ExperimentConfig.from_text("run.n 64")
    with pytest.raises(ValidationError):
        make_config("problem.colour = red")
    with pytest.raises(ValidationError):
        make_config("run.sweep = 64, 32, 128")
    with pytest.raises(ValidationError):
        make_config("run.eval_times = 0.2")
    with pytest.raises(ValidationError):
        make_config("problem.initial_modes = 1")
    with pytest.raises(ParameterValidationError):
        ExperimentConfig.from_file("/nonexistent/fracback.cfg")


def test_config_overrides_and_environment(monkeypatch):
    config = make_config().with_overrides(**{"run.seed": 5, "run.method": None})
    assert config.run.seed == 5
    assert config.run.method == "first_truncation"
    monkeypatch.setenv("FRACBACK_SEED", "11")
    monkeypatch.setenv("FRACBACK_WORKERS", "3")
    config = config.with_env()
    assert config.run.seed == 11
    assert config.run.workers == 3


def test_schema_lines_document_every_key():
    lines = ExperimentConfig.schema_lines()
    assert "run.seed = 0  # Master seed" in lines
    assert any(line.startswith("problem.initial_modes = {1: 1.0}") for line in lines)


def test_build_instance_with_source_and_coefficient():
    config = make_config(
        "problem.source_modes = 1:2.0",
        "problem.source_profile = decay",
        "problem.coefficient = oscillating",
        "problem.coefficient_amplitude = 0.5",
        "problem.a0 = 1.5",
    )
    instance = build_instance(config.problem)
    assert instance.has_source
    assert instance.source_coefficients(np.array([1.0]), 8)[0, 1] == pytest.approx(2.0 * math.exp(-1.0))
    assert instance.coefficient.upper == pytest.approx(1.5)
    assert instance.initial_state.cap == 8


def test_zero_noise_error_is_the_tail_above_cutoff():
    config = make_config(
        "problem.initial_modes = 1:1.0, 2:0.5, 3:0.25, 6:0.2",
        "noise.sigma = 0",
        "regularizer.M_n = 3",
        "run.n = 64",
    )
    report = ExperimentRunner(config).run_trial(0)
    assert report.M_n == 3
    assert report.l2_errors[0] == pytest.approx(0.2 * math.exp(-36.0 * 0.05), abs=1e-9)
    assert report.l2_errors[1] == pytest.approx(0.2 * math.exp(-36.0 * 0.1), abs=1e-9)
    assert report.diagnostics.iterations == 1


def test_trials_are_reproducible():
    config = make_config("problem.nonlinearity = sin", "run.seed = 17")
    first = ExperimentRunner(config).run_trial(2)
    second = ExperimentRunner(config).run_trial(2)
    other = ExperimentRunner(config).run_trial(3)
    assert first == second
    assert first.l2_errors != other.l2_errors


def test_evaluation_times_must_be_grid_nodes():
    with pytest.raises(ParameterValidationError):
        ExperimentRunner(make_config("grid.steps = 10", "run.eval_times = 0.033"))


def test_cutoff_rule_and_fixed_cutoff():
    runner = ExperimentRunner(make_config())
    assert runner.cutoff(64) == 4
    with pytest.raises(ParameterValidationError):
        ExperimentRunner(make_config("regularizer.M_n = 40")).cutoff(32)


def test_clamp_level_selection():
    assert ExperimentRunner(make_config("problem.nonlinearity = sin")).clamp_level(64) is None
    cubic = ExperimentRunner(make_config("problem.nonlinearity = cubic"))
    assert math.isfinite(cubic.clamp_level(64))
    assert ExperimentRunner(make_config("problem.nonlinearity = cubic", "regularizer.Q_n = 2.5")).clamp_level(64) == 2.5


def test_noise_free_estimate_has_zero_spread():
    estimate = estimate_mise(make_config("problem.nonlinearity = sin", "noise.sigma = 0"))
    assert estimate.trials == 3
    row = estimate.row(0.1)
    assert row.stderr == 0.0
    assert row.bound is not None and row.bound > 0.0
    assert estimate.flagged_trials == []


def test_single_trial_has_no_standard_error():
    estimate = ExperimentRunner(make_config("run.trials = 1")).estimate()
    assert all(row.stderr is None for row in estimate.rows)


def test_worker_count_does_not_change_results():
    serial = ExperimentRunner(make_config("run.trials = 4", "run.workers = 1")).estimate()
    pooled = ExperimentRunner(make_config("run.trials = 4", "run.workers = 3")).estimate()
    assert serial.rows == pooled.rows


def test_second_regularizer_trials():
    config = make_config("problem.nonlinearity = sin", "run.method = second_truncation", "regularizer.M_n = 3")
    estimate = ExperimentRunner(config).estimate()
    assert estimate.method == "second_truncation"
    assert {row.metric for row in estimate.rows} == {"l2"}
    assert all(row.bound is not None for row in estimate.rows)


def test_perturbed_coefficient_trials_are_flagged():
    config = make_config(
        "run.method = quasi_reversibility",
        "problem.cap = 4",
        "noise.sigma = 0",
        "noise.eps = 20",
        "regularizer.M_n = 2",
        "grid.steps = 50",
        "run.n = 16",
        "run.trials = 2",
    )
    runner = ExperimentRunner(config)
    report = runner.run_trial(0)
    assert not report.flags["coefficient_within_bounds"]
    assert not report.flags["b0_positive"]
    assert report.t_n is None
    estimate = runner.summarize([report, runner.run_trial(1)])
    assert estimate.flagged_trials == [0, 1]
    assert {row.metric for row in estimate.rows} == {"l2", "h_beta"}


def test_quasi_reversibility_reports_error_at_t_n():
    config = make_config(
        "run.method = quasi_reversibility",
        "problem.T = 1.0",
        "problem.a0 = 1.5",
        "noise.sigma = 0",
        "regularizer.M_n = 3",
        "run.trials = 2",
    )
    estimate = ExperimentRunner(config).estimate()
    rows = [row for row in estimate.rows if row.metric == "t_n"]
    assert len(rows) == 2
    assert rows[0].bound is not None
    assert rows[0].mise <= rows[0].bound


def test_sweep_without_noise_reports_floor():
    config = make_config("noise.sigma = 0", "run.sweep = 16, 32, 64", "run.trials = 2")
    result = ExperimentRunner(config).sweep()
    assert len(result.estimates) == 3
    assert len(result.rows) == 3 * 2
    assert all(fit.noise_free_floor for fit in result.fits)


def test_sweep_needs_three_points():
    config = make_config("run.sweep = 16, 32")
    with pytest.raises(ParameterValidationError):
        ExperimentRunner(config).sweep()


def test_assumption_budget_of_linear_mode():
    config = make_config("problem.T = 0.5", "problem.initial_modes = 2:1.0")
    instance = build_instance(config.problem)
    truth = forward_solve(instance, config.time_grid(), 8)
    report = verify_assumptions(truth, SmoothnessAssumptions(ass1=True), 8, instance)
    assert report.budgets["P1"].value == pytest.approx(1.0, abs=1e-9)
    assert report.all_verified
    assert report.E1 == pytest.approx(1.0 / 0.5 + 1.0)


def test_slow_spectrum_fails_gevrey_claim():
    modes = ", ".join(f"{p}:{1.0 / p}" for p in range(1, 9))
    config = make_config(f"problem.initial_modes = {modes}")
    instance = build_instance(config.problem)
    truth = forward_solve(instance, config.time_grid(), 8)
    report = verify_assumptions(truth, SmoothnessAssumptions(v_tilde=True), 8, instance)
    assert not report.all_verified
    assert report.unverified == ["V_tilde"]


def test_source_budget_claim():
    config = make_config("problem.source_modes = 1:1.0")
    instance = build_instance(config.problem)
    truth = forward_solve(instance, config.time_grid(), 8)
    report = verify_assumptions(truth, SmoothnessAssumptions(assu2=True), 8, instance)
    assert report.budgets["E2"].value == pytest.approx(1.0)
    with pytest.raises(ParameterValidationError):
        verify_assumptions(truth, SmoothnessAssumptions(ass1=True), 8)


def test_report_files(tmp_path):
    config = make_config("run.sweep = 16, 32, 64", "run.trials = 2")
    runner = ExperimentRunner(config)
    reports = runner.run_trials(32, runner.cutoff(32))
    trials = write_trials_csv(reports, tmp_path / "trials.csv").read_text(encoding="utf-8").splitlines()
    assert trials[0] == "trial,t,metric,value"
    assert len(trials) == 1 + 2 * 2
    mise = write_mise_csv(runner.summarize(reports), tmp_path / "mise.csv").read_text(encoding="utf-8")
    assert mise.startswith("t,metric,mise,stderr,bound\n0.05,l2,")
    sweep = write_sweep_csv(runner.sweep(), tmp_path / "sweep.csv").read_text(encoding="utf-8")
    assert sweep.splitlines()[0] == "n,M_n,t,mise,stderr,bound,slope"


def test_invariant_checks_pass():
    results = run_checks(make_config())
    assert [result.name for result in results][-1] == "trial_determinism"
    failed = [result for result in results if not result.passed]
    assert failed == []


def test_parseval_monotonicity_and_qr_fixed_point_checks():
    results = {result.name: result for result in run_checks()}
    for name in ("parseval", "norm_monotonicity", "qr_fixed_point"):
        assert results[name].passed, results[name].detail
    assert "trial_determinism" not in results


def test_convergence_failure_keeps_iteration_record():
    config = make_config("problem.nonlinearity = sin", "regularizer.picard_max_iters = 1")
    with pytest.raises(ConvergenceError) as excinfo:
        ExperimentRunner(config).run_trial(0)
    assert excinfo.value.iterations == 1
    assert "trial 0" in str(excinfo.value)


def test_quasi_reversibility_estimate_skips_trials_without_margin():
    config = make_config(
        "run.method = quasi_reversibility",
        "problem.T = 1.0",
        "problem.a0 = 1.5",
        "noise.sigma = 0",
        "regularizer.M_n = 3",
        "run.trials = 2",
    )
    runner = ExperimentRunner(config)
    first, second = runner.run_trials(32, 3)
    negative = second.model_copy(update={"b0": -0.1})
    mixed = runner.summarize([first, negative])
    alone = runner.summarize([first])
    assert alone.row(1.0, "h_beta").bound is not None
    assert mixed.row(1.0, "h_beta").bound == alone.row(1.0, "h_beta").bound
    assert any("excludes 1 trial" in note for note in mixed.notes)


def test_per_node_noise_deviations():
    extra = ("run.n = 4", "regularizer.M_n = 2")
    runner = ExperimentRunner(make_config("noise.sigma = 0.0, 0.0, 0.05, 0.05", *extra))
    assert runner.noise.sigma == [0.0, 0.0, 0.05, 0.05]
    observed = runner.observe(0, 4).final_samples.values
    clean = ExperimentRunner(make_config("noise.sigma = 0", *extra)).observe(0, 4).final_samples.values
    assert observed[:2] == pytest.approx(clean[:2], abs=0.0)
    assert np.all(observed[2:] != clean[2:])
    with pytest.raises(ParameterValidationError):
        runner.observe(0, 8)
    with pytest.raises(ValidationError):
        make_config("noise.sigma = -0.1, 0.05")


def test_pure_noise_error_matches_its_variance():
    config = make_config(
        "problem.initial_modes = 1:0.0",
        "noise.sigma = 0.05",
        "noise.v_max = 0.1",
        "regularizer.M_n = 3",
        "run.n = 64",
        "run.trials = 500",
    )
    estimate = ExperimentRunner(config).estimate()
    for t in (0.05, 0.1):
        growth = sum(math.exp(2.0 * (0.1 - t) * p**2) for p in range(4))
        row = estimate.row(t, "l2")
        expected = math.pi * 0.05**2 * growth / 64
        assert abs(row.mise - expected) <= 4.0 * row.stderr
        assert row.mise <= math.pi**2 * 0.1**2 * growth / 64


def test_standard_error_shrinks_with_trial_count():
    config = make_config(
        "problem.initial_modes = 1:0.0",
        "noise.sigma = 0.05",
        "regularizer.M_n = 3",
        "run.n = 64",
    )
    runner = ExperimentRunner(config)
    smaller = runner.estimate(trials=500).row(0.05, "l2").stderr
    larger = runner.estimate(trials=1000).row(0.05, "l2").stderr
    assert 1.5 <= smaller**2 / larger**2 <= 2.6
