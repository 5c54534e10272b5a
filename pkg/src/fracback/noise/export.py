"""CSV export of observed data, one file per trial."""
import csv
from pathlib import Path

from .config import NoiseSpec
from .schemas import ObservedData


def write_observed_csv(data: ObservedData, spec: NoiseSpec, trial: int, path: Path) -> Path:
    """Rows (series, k, t, value); the first line names seed, trial and spec."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    T = repr(float(data.grid[-1]))
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(f"# seed={spec.seed} trial={trial} spec={spec.model_dump_json()}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["series", "k", "t", "value"])
        for k, value in enumerate(data.final_samples.values, start=1):
            writer.writerow(["final", k, T, repr(float(value))])
        for j, t in enumerate(data.grid):
            for k, value in enumerate(data.source_paths[j], start=1):
                writer.writerow(["source", k, repr(float(t)), repr(float(value))])
        for t, value in zip(data.grid, data.coefficient.path):
            writer.writerow(["coefficient", 0, repr(float(t)), repr(float(value))])
    return path
