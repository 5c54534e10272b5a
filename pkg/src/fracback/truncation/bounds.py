"""Smoothness budgets and the error estimates of the truncation regularizers."""
import math
import sys
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import logsumexp, zeta

from fracback.errors import ParameterValidationError
from fracback.forward import ProblemInstance, Trajectory
from fracback.noise import NoiseSpec
from fracback.spectral import NormSpec, squared_norms
from .schemas import TruncationBound, TruncationParams

TAIL_SHARE_TOLERANCE = 1e-3


class BudgetEstimate(BaseModel):
    """Supremum over time of a weighted coefficient sum, computed up to cap."""
    value: float = Field(..., description="Supremum over the grid of the partial sum")
    verified: bool = Field(..., description="Sum finite and settled within the upper half of the modes")
    tail_share: float = Field(..., description="Largest share of the sum carried by the upper half of the modes")


def weighted_budget(coeffs: np.ndarray, times: np.ndarray,
                    log_weight: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> BudgetEstimate:
    """sup_t sum_{p>=1} w(t, p) c_p(t)^2 evaluated in log space.

    The claim counts as verified when the upper half of the modes carries at
    most TAIL_SHARE_TOLERANCE of the sum at every time.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))[:, 1:]
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    p = np.arange(1, coeffs.shape[1] + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_terms = log_weight(times[:, None], p[None, :]) + 2.0 * np.log(np.abs(coeffs))
    totals = logsumexp(log_terms, axis=1)
    half = max(1, coeffs.shape[1] // 2)
    with np.errstate(invalid="ignore"):
        upper = logsumexp(log_terms[:, half:], axis=1) if coeffs.shape[1] > half else np.full(times.size, -np.inf)
        shares = np.where(np.isfinite(totals), np.exp(upper - totals), 0.0)
    shares = np.nan_to_num(shares, nan=0.0)
    log_sup = float(np.max(totals))
    value = math.exp(log_sup) if log_sup < 709.0 else math.inf
    share = float(np.max(shares))
    return BudgetEstimate(value=value, verified=math.isfinite(value) and share <= TAIL_SHARE_TOLERANCE,
                          tail_share=share)


def ass1_budget(trajectory: Trajectory, beta: float) -> BudgetEstimate:
    """P1 = sup_t sum_p e^{2 p^{2 beta} t} u_p(t)^2."""
    return weighted_budget(trajectory.states, trajectory.times, lambda t, p: 2.0 * p ** (2.0 * beta) * t)


def ass2_budget(trajectory: Trajectory, beta: float, alpha: float) -> BudgetEstimate:
    """P2 = sup_t sum_p p^{2 beta alpha} e^{2 p^{2 beta} t} u_p(t)^2."""
    return weighted_budget(
        trajectory.states,
        trajectory.times,
        lambda t, p: 2.0 * beta * alpha * np.log(p) + 2.0 * p ** (2.0 * beta) * t,
    )


def source_budget(source_coeffs: np.ndarray, times: np.ndarray, gamma: float) -> BudgetEstimate:
    """E2 = sup_t sum_p p^{2 gamma} g_p(t)^2."""
    return weighted_budget(source_coeffs, times, lambda t, p: 2.0 * gamma * np.log(p) + 0.0 * t)


def gevrey_budget(coeffs: np.ndarray, times: np.ndarray, T: float, a0: float, beta: float) -> BudgetEstimate:
    """sup_t ||v(t)||^2 in the Gevrey-weighted norm."""
    return weighted_budget(
        coeffs,
        times,
        lambda t, p: 4.0 * beta * np.log(p) + 2.0 * T * a0 * p ** (2.0 * beta) + 0.0 * t,
    )


def growth_constant(trajectory: Trajectory, instance: ProblemInstance, lipschitz: float) -> float:
    """E = ||F(0)||_{L2} + max(K, 1) sup_t ||u(t)||."""
    f_zero = abs(instance.nonlinearity.at_zero()) * math.sqrt(math.pi)
    sup_u = float(np.max(np.sqrt(squared_norms(trajectory.states, NormSpec.l2()))))
    return f_zero + max(lipschitz, 1.0) * sup_u


def truncation_constants(trajectory: Trajectory, instance: ProblemInstance, noise: NoiseSpec,
                         lipschitz: float, source_e2: float, gamma: float) -> dict:
    """C1, C2 and C3 assembled from their defining sums."""
    beta, T = instance.beta, instance.T
    E = growth_constant(trajectory, instance, lipschitz)
    E1 = E / T + E
    C1 = 2.0 * math.sqrt(2.0 / math.pi) * E1 / 4.0**beta * float(zeta(2.0 * beta))
    C2 = 2.0 * math.sqrt(2.0 / math.pi) * source_e2 / 2.0**gamma * float(zeta(gamma)) if source_e2 else 0.0
    C3 = math.pi**2 * noise.v_max**2 + noise.vartheta**2 * (T + T**3) + C1**2 + T**2 * C2**2
    return {"E": E, "E1": E1, "E2": source_e2, "C1": C1, "C2": C2, "C3": C3}


def _effective_lipschitz(instance: ProblemInstance, params: TruncationParams) -> float:
    if params.clamp_level is not None:
        return 2.0 * instance.nonlinearity.local_lipschitz(params.clamp_level)
    K = instance.nonlinearity.lipschitz
    if not math.isfinite(K):
        raise ParameterValidationError("estimate needs a global Lipschitz constant or a clamp level")
    return K


def evaluate_truncation_bound(
    trajectory: Trajectory,
    instance: ProblemInstance,
    params: TruncationParams,
    noise: NoiseSpec,
    gamma: float = 1.5,
    alpha: Optional[float] = None,
) -> TruncationBound:
    """6 e^{-2M^{2b}t}[C3 (M+1) e^{2TM^{2b}}/n + P] e^{6K(T-t)} on the trajectory grid.

    P is the (ass1) budget, or M^{-2 beta alpha} times the (ass2) budget when
    alpha is given. Both budgets are summed up to the trajectory cap.
    """
    beta, T, M = instance.beta, instance.T, params.M_n
    times = trajectory.times
    K = _effective_lipschitz(instance, params)
    source = instance.source_coefficients(times, trajectory.cap)
    e2 = source_budget(source, times, gamma)
    constants = truncation_constants(trajectory, instance, noise, K, e2.value, gamma)

    if alpha is None:
        budget = ass1_budget(trajectory, beta)
        smooth_term = budget.value
        variant = "ass1"
    else:
        budget = ass2_budget(trajectory, beta, alpha)
        smooth_term = M ** (-2.0 * beta * alpha) * budget.value
        variant = "ass2"
    verified = budget.verified and e2.verified
    if not verified:
        print(f"[WARNING] smoothness claim {variant} not verified up to cap {trajectory.cap}", file=sys.stderr)

    rate = M ** (2.0 * beta)
    bracket = constants["C3"] * params.noise_amplification(T, beta) + smooth_term
    values = 6.0 * np.exp(-2.0 * rate * times) * bracket * np.exp(6.0 * K * (T - times))
    constants.update({"P": budget.value, "K": K})
    return TruncationBound(
        variant=variant,
        times=times.tolist(),
        values=values.tolist(),
        constants=constants,
        assumption_verified=verified,
    )


def evaluate_second_bound(
    trajectory: Trajectory,
    instance: ProblemInstance,
    params: TruncationParams,
    noise: NoiseSpec,
    gamma: float = 1.5,
) -> TruncationBound:
    """e^{-2M^{2b}t}[(5 pi^2 V^2 + C1^2)(M+1)e^{2TM^{2b}}/n + 5 M^{-2 beta gamma}||u(0)||^2_{H^gamma}]/(1-5KT).

    The H^gamma norm is the energy form sum p^{2 gamma} u_p(0)^2.
    """
    beta, T, M = instance.beta, instance.T, params.M_n
    K = instance.nonlinearity.lipschitz
    if not 5.0 * K * T < 1.0:
        raise ParameterValidationError(f"second estimate requires 5KT < 1, got {5.0 * K * T:.4g}")
    times = trajectory.times
    constants = truncation_constants(trajectory, instance, noise, K, 0.0, gamma)
    initial_h = float(squared_norms(trajectory.states[0], NormSpec.h_gamma(gamma / 2.0)))
    rate = M ** (2.0 * beta)
    bracket = (5.0 * math.pi**2 * noise.v_max**2 + constants["C1"] ** 2) * params.noise_amplification(T, beta)
    bracket += 5.0 * M ** (-2.0 * beta * gamma) * initial_h
    values = np.exp(-2.0 * rate * times) * bracket / (1.0 - 5.0 * K * T)
    constants.update({"u0_H_gamma_sq": initial_h, "K": K})
    return TruncationBound(
        variant="second",
        times=times.tolist(),
        values=values.tolist(),
        constants=constants,
        assumption_verified=True,
    )
