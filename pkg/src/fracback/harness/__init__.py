"""Monte Carlo experiments: MISE estimates, rate sweeps and invariant checks."""

from .assumptions import verify_assumptions
from .checks import run_checks
from .config import ExperimentConfig
from .export import write_json, write_mise_csv, write_sweep_csv, write_trials_csv
from .runner import ExperimentRunner, estimate_mise, rate_sweep, run_trial
from .scenario import build_instance
from .schemas import (
    AssumptionReport,
    CheckResult,
    MiseEstimate,
    MiseRow,
    SlopeFit,
    SmoothnessAssumptions,
    SweepResult,
    SweepRow,
    TrialReport,
)

__all__ = [
    "AssumptionReport",
    "CheckResult",
    "ExperimentConfig",
    "ExperimentRunner",
    "MiseEstimate",
    "MiseRow",
    "SlopeFit",
    "SmoothnessAssumptions",
    "SweepResult",
    "SweepRow",
    "TrialReport",
    "build_instance",
    "estimate_mise",
    "rate_sweep",
    "run_checks",
    "run_trial",
    "verify_assumptions",
    "write_json",
    "write_mise_csv",
    "write_sweep_csv",
    "write_trials_csv",
]
