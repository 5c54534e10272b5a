"""Command-line entry point for forward solves, trials, MISE runs, sweeps and checks."""
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
from pydantic import ValidationError

from fracback.errors import NumericalFailure, ParameterValidationError
from fracback.forward import write_trajectory_csv
from fracback.harness import (
    ExperimentConfig,
    ExperimentRunner,
    run_checks,
    write_json,
    write_mise_csv,
    write_sweep_csv,
    write_trials_csv,
)
from fracback.noise import write_observed_csv

METHODS = ["first_truncation", "second_truncation", "quasi_reversibility"]


def _print_schema() -> None:
    print("Configuration keys (key = default  # description):", file=sys.stderr)
    for line in ExperimentConfig.schema_lines():
        print(f"  {line}", file=sys.stderr)


def _load(config_path: Optional[Path], **overrides) -> ExperimentConfig:
    if config_path is None:
        error_msg = "Missing required option '--config'"
        print(f"[ERROR] {error_msg}", file=sys.stderr)
        raise ParameterValidationError(error_msg)
    config = ExperimentConfig.from_file(config_path).with_env()
    return config.with_overrides(**overrides)


def _out_dir(config: ExperimentConfig, out: Optional[Path]) -> Path:
    return Path(out) if out is not None else Path(config.run.output_dir)


config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), help="Key-value configuration file"
)
seed_option = click.option("--seed", type=int, envvar="FRACBACK_SEED", help="Master seed")
out_option = click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Output directory")
method_option = click.option("--method", type=click.Choice(METHODS), help="Regularizer")
trials_option = click.option("--trials", type=click.IntRange(min=1), help="Monte Carlo trial count")
workers_option = click.option(
    "--workers", type=click.IntRange(min=1), envvar="FRACBACK_WORKERS", help="Concurrent trial workers"
)


@click.group()
def cli() -> None:
    """Regularized backward solves for nonlinear space-fractional diffusion."""


@cli.command()
@config_option
@out_option
def forward(config_path: Optional[Path], out: Optional[Path]) -> int:
    """Solve the ground-truth problem and export its trajectory."""
    config = _load(config_path)
    runner = ExperimentRunner(config)
    path = write_trajectory_csv(runner.truth, _out_dir(config, out) / "trajectory.csv")
    print(path)
    return 0


@cli.command()
@config_option
@seed_option
@out_option
@method_option
@click.option("--trial", type=click.IntRange(min=0), default=0, show_default=True, help="Trial index")
def regularize(config_path: Optional[Path], seed: Optional[int], out: Optional[Path], method: Optional[str],
               trial: int) -> int:
    """Run one trial and write its observations and full report."""
    config = _load(config_path, **{"run.seed": seed, "run.method": method})
    runner = ExperimentRunner(config)
    report = runner.run_trial(trial)
    target = _out_dir(config, out)
    write_observed_csv(runner.observe(trial, config.run.n), runner.noise, trial, target / f"observed_{trial}.csv")
    write_trials_csv([report], target / f"trial_{trial}.csv")
    print(write_json(report, target / f"trial_{trial}.json"))
    return 0


@cli.command()
@config_option
@seed_option
@out_option
@method_option
@trials_option
@workers_option
def mise(config_path: Optional[Path], seed: Optional[int], out: Optional[Path], method: Optional[str],
         trials: Optional[int], workers: Optional[int]) -> int:
    """Estimate the MISE over R trials and compare it with the error estimate."""
    config = _load(config_path, **{
        "run.seed": seed, "run.method": method, "run.trials": trials, "run.workers": workers,
    })
    runner = ExperimentRunner(config)
    n = config.run.n
    reports = runner.run_trials(n, runner.cutoff(n))
    estimate = runner.summarize(reports)
    target = _out_dir(config, out)
    write_trials_csv(reports, target / "trials.csv")
    write_json(estimate, target / "mise.json")
    print(write_mise_csv(estimate, target / "mise.csv"))
    return 0


@cli.command()
@config_option
@seed_option
@out_option
@method_option
@trials_option
@workers_option
def sweep(config_path: Optional[Path], seed: Optional[int], out: Optional[Path], method: Optional[str],
          trials: Optional[int], workers: Optional[int]) -> int:
    """Fit the log-log MISE slope over the sample counts of the sweep list."""
    config = _load(config_path, **{
        "run.seed": seed, "run.method": method, "run.trials": trials, "run.workers": workers,
    })
    result = ExperimentRunner(config).sweep()
    target = _out_dir(config, out)
    write_json(result, target / "sweep.json")
    print(write_sweep_csv(result, target / "sweep.csv"))
    for fit in result.fits:
        print(f"[INFO] t={fit.t:g}: slope {fit.slope}, predicted {fit.predicted:.4g}, "
              f"within band {fit.within_band}", file=sys.stderr)
    return 0


@cli.command()
@config_option
@seed_option
def check(config_path: Optional[Path], seed: Optional[int]) -> int:
    """Run the invariant suite; exits 2 when any check fails."""
    config = _load(config_path, **{"run.seed": seed}) if config_path is not None else None
    results = run_checks(config)
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}")
    return 0 if all(result.passed for result in results) else 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI; 0 on success, 1 on invalid input, 2 on numerical failure."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="fracback",
                          standalone_mode=False)
    except click.UsageError as e:
        e.show()
        _print_schema()
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    except (ParameterValidationError, ValidationError) as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        _print_schema()
        return 1
    except NumericalFailure as e:
        print(f"[ERROR] Numerical failure: {e}", file=sys.stderr)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
