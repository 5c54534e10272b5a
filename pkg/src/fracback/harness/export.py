"""CSV and JSON reports of trials, MISE estimates and sweeps."""
import csv
from pathlib import Path
from typing import Iterable, List, Optional

from pydantic import BaseModel

from .schemas import MiseEstimate, SweepResult, TrialReport


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def _write_rows(path: Path, header: List[str], rows: Iterable[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trials_csv(reports: List[TrialReport], path: Path) -> Path:
    """Long format: one row per (trial, t, metric)."""
    rows = []
    for report in sorted(reports, key=lambda r: r.trial):
        for i, t in enumerate(report.times):
            rows.append([report.trial, _cell(t), "l2", _cell(report.l2_errors[i])])
            if report.h_beta_errors is not None:
                rows.append([report.trial, _cell(t), "h_beta", _cell(report.h_beta_errors[i])])
        if report.error_at_t_n is not None:
            rows.append([report.trial, _cell(report.t_n), "t_n", _cell(report.error_at_t_n)])
    return _write_rows(path, ["trial", "t", "metric", "value"], rows)


def write_mise_csv(estimate: MiseEstimate, path: Path) -> Path:
    """One row per (t, metric) of a MISE estimate."""
    rows = [
        [_cell(row.t), row.metric, _cell(row.mise), _cell(row.stderr), _cell(row.bound)]
        for row in estimate.rows
    ]
    return _write_rows(path, ["t", "metric", "mise", "stderr", "bound"], rows)


def write_sweep_csv(result: SweepResult, path: Path) -> Path:
    """One row per (n, t) of a rate sweep."""
    rows = [
        [row.n, row.M_n, _cell(row.t), _cell(row.mise), _cell(row.stderr), _cell(row.bound), _cell(row.slope)]
        for row in result.rows
    ]
    return _write_rows(path, ["n", "M_n", "t", "mise", "stderr", "bound", "slope"], rows)


def write_json(report: BaseModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
