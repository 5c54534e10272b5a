"""Check smoothness claims against a computed trajectory."""
import math
import sys
from typing import Optional

import numpy as np

from fracback.errors import ParameterValidationError
from fracback.forward import ProblemInstance, Trajectory
from fracback.truncation import BudgetEstimate, ass1_budget, ass2_budget, gevrey_budget, source_budget
from fracback.truncation.bounds import growth_constant
from .schemas import AssumptionReport, SmoothnessAssumptions


def _worst(first: BudgetEstimate, second: BudgetEstimate) -> BudgetEstimate:
    return BudgetEstimate(
        value=max(first.value, second.value),
        verified=first.verified and second.verified,
        tail_share=max(first.tail_share, second.tail_share),
    )


def verify_assumptions(
    trajectory: Trajectory,
    assumptions: SmoothnessAssumptions,
    cap: int,
    instance: Optional[ProblemInstance] = None,
) -> AssumptionReport:
    """Budget of every claimed assumption, summed up to cap.

    A budget is unverified when it is infinite or when the upper half of the
    modes still carries a visible share of it (tail_share). The source and
    Gevrey claims need the instance for g, T and a0.
    """
    if cap < 1:
        raise ParameterValidationError(f"cap must be at least 1, got {cap}")
    truncated = Trajectory(times=trajectory.times, states=trajectory.padded(cap))
    times = truncated.times
    beta = instance.beta if instance is not None else None
    budgets = {}

    if (assumptions.ass1 or assumptions.ass2 or assumptions.v_tilde) and instance is None:
        raise ParameterValidationError("checking ass1, ass2 or v_tilde needs the problem instance")
    if assumptions.ass1:
        budgets["P1"] = ass1_budget(truncated, beta)
    if assumptions.ass2:
        budgets["P2"] = ass2_budget(truncated, beta, assumptions.alpha)

    source = np.zeros_like(truncated.states)
    if instance is not None:
        source = instance.source_coefficients(times, cap)
    if assumptions.assu2:
        budgets["E2"] = source_budget(source, times, assumptions.gamma)
    if assumptions.v_tilde:
        u_budget = gevrey_budget(truncated.states, times, instance.T, instance.a0, instance.beta)
        g_budget = gevrey_budget(source, times, instance.T, instance.a0, instance.beta)
        budgets["V_tilde"] = _worst(u_budget, g_budget)

    E1 = None
    if instance is not None and instance.nonlinearity.globally_lipschitz:
        E = growth_constant(truncated, instance, instance.nonlinearity.lipschitz)
        E1 = E / instance.T + E

    all_verified = all(budget.verified for budget in budgets.values())
    for name, budget in budgets.items():
        if not budget.verified:
            value = budget.value if math.isfinite(budget.value) else "inf"
            print(
                f"[WARNING] {name} not verified up to cap {cap}: partial sum {value}, "
                f"upper-half share {budget.tail_share:.3g}",
                file=sys.stderr,
            )
    return AssumptionReport(cap=cap, budgets=budgets, E1=E1, all_verified=all_verified)
