"""Fixed-point driver shared by the regularized solvers."""
import sys
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from fracback.errors import ConvergenceError, NumericalFailure


class PicardDiagnostics(BaseModel):
    """Iteration record attached to regularized solutions."""
    iterations: int = Field(..., description="Number of map applications")
    contraction_ratio: Optional[float] = Field(
        default=None, description="Ratio of the last two increments"
    )
    final_increment: float = Field(..., description="Last increment in the stopping norm")


@dataclass
class PicardResult:
    solution: np.ndarray
    diagnostics: PicardDiagnostics
    increments: List[float] = field(default_factory=list)


def sup_l2(difference: np.ndarray) -> float:
    """Supremum over grid rows of the L2 norm."""
    return float(np.max(np.linalg.norm(difference, axis=-1)))


def picard_iterate(
    update: Callable[[np.ndarray], np.ndarray],
    initial: np.ndarray,
    tol: float,
    max_iters: int,
    measure: Callable[[np.ndarray], float] = sup_l2,
    label: str = "picard",
) -> PicardResult:
    """Iterate x <- update(x) until measure(x_new - x) <= tol."""
    current = initial
    increments: List[float] = []
    for iteration in range(1, max_iters + 1):
        candidate = update(current)
        increment = measure(candidate - current)
        if not np.isfinite(increment):
            error_msg = f"{label}: non-finite increment at iteration {iteration}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise NumericalFailure(error_msg)
        increments.append(increment)
        current = candidate
        if increment <= tol:
            return PicardResult(
                solution=current,
                diagnostics=PicardDiagnostics(
                    iterations=iteration,
                    contraction_ratio=_ratio(increments),
                    final_increment=increment,
                ),
                increments=increments,
            )

    ratio = _ratio(increments)
    error_msg = (
        f"{label}: no convergence after {max_iters} iterations "
        f"(last increment {increments[-1]:.3e}, ratio {ratio})"
    )
    print(f"[ERROR] {error_msg}", file=sys.stderr)
    raise ConvergenceError(error_msg, iterations=max_iters, last_ratio=ratio)


def _ratio(increments: List[float]) -> Optional[float]:
    if len(increments) < 2 or increments[-2] == 0.0:
        return None
    return increments[-1] / increments[-2]
