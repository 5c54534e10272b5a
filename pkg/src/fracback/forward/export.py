"""CSV export of trajectories."""
import csv
from pathlib import Path

from .schemas import Trajectory


def write_trajectory_csv(trajectory: Trajectory, path: Path) -> Path:
    """Write one row per (t, p, coefficient)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "p", "coefficient"])
        for t, state in zip(trajectory.times, trajectory.states):
            for p, value in enumerate(state):
                writer.writerow([repr(float(t)), p, repr(float(value))])
    return path
