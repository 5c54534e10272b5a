"""Error functionals of the quasi-reversibility regularizer."""
import math
import sys
from typing import Optional

import numpy as np
from scipy.special import zeta

from fracback.errors import NumericalFailure, ParameterValidationError
from fracback.forward import ProblemInstance, Trajectory
from fracback.noise import NoiseSpec
from fracback.spectral import NormSpec, squared_norms
from .schemas import QRBounds, QRParams


def smoothness_constant(h_delta_norm: float, delta: float) -> float:
    """max(2/4^delta, sqrt(2)/(sqrt(pi) 2^delta)) zeta(delta) ||.||_{H^delta}."""
    if delta <= 1.0:
        raise ParameterValidationError(f"smoothness order must exceed 1, got {delta}")
    factor = max(2.0 / 4.0**delta, math.sqrt(2.0) / (math.sqrt(math.pi) * 2.0**delta))
    return factor * float(zeta(delta)) * h_delta_norm


def _sup_squared(coeffs: np.ndarray, spec: NormSpec, what: str) -> float:
    try:
        value = float(np.max(squared_norms(coeffs, spec)))
    except NumericalFailure:
        print(f"[ERROR] {what} is not finite up to the cap", file=sys.stderr)
        raise
    return value


def evaluate_qr_bounds(
    trajectory: Trajectory,
    instance: ProblemInstance,
    params: QRParams,
    noise: NoiseSpec,
    delta: float = 2.0,
    b0: Optional[float] = None,
) -> QRBounds:
    """Phi and Pi functionals with their per-time estimates on the trajectory grid."""
    beta, T, M, n = instance.beta, instance.T, params.M_n, params.n
    times = trajectory.times
    states = trajectory.states
    cap = trajectory.cap
    source = instance.source_coefficients(times, cap)
    V2 = noise.v_max**2
    theta2 = noise.vartheta**2
    eps2 = noise.eps**2
    K = instance.nonlinearity.local_lipschitz(params.Q_n) if math.isfinite(params.Q_n) else instance.nonlinearity.lipschitz
    if not math.isfinite(K):
        raise ParameterValidationError("QR estimates need a finite clamp level or a global Lipschitz constant")

    gevrey = NormSpec.v_tilde(T, params.a0, beta)
    uT_gevrey = float(squared_norms(states[-1], gevrey))
    u_gevrey = _sup_squared(states, gevrey, "sup_t ||u||_V")
    g_gevrey = _sup_squared(source, gevrey, "sup_t ||g||_V")
    # H^{2 beta} with weight p^{8 beta}; it dominates ||A^beta u||^2 = sum p^{4 beta} u_p^2
    # used by the coefficient-noise term. Error norms use h_gamma(beta / 2), weight p^{2 beta}.
    u_h2beta = _sup_squared(states, NormSpec.h_gamma(2.0 * beta), "sup_t ||u||_{H^{2 beta}}")
    uT_hdelta = math.sqrt(float(squared_norms(states[-1], NormSpec.h_gamma(delta))))
    g_hdelta = math.sqrt(_sup_squared(source, NormSpec.h_gamma(delta), "sup_t ||g||_{H^delta}"))
    C_bar = smoothness_constant(uT_hdelta, delta)
    D_bar = smoothness_constant(g_hdelta, delta)

    rate = M ** (2.0 * beta)
    growth = math.exp(2.0 * T * rate)
    phi = (math.pi**2 * V2 + C_bar**2 + math.pi**2 * T**3 * theta2 + T * D_bar**2) * (M + 1) * growth / n
    phi += eps2 * growth * T**2 * u_h2beta
    phi += uT_gevrey + T * g_gevrey + T * params.a0**2 * u_gevrey
    l2_bound = math.exp((2.0 * K + 4.0) * T) * np.exp(-2.0 * times * M**beta) * phi

    dudt = np.gradient(states, times, axis=0)
    dudt_sup = float(np.max(squared_norms(dudt, NormSpec.l2())))
    initial_time = 2.0 * phi * math.exp((2.0 * K + 4.0) * T) / M**beta + 2.0 / M**beta * dudt_sup

    data_final = (math.pi**2 * V2 + C_bar**2) * (M + 1) / n + math.exp(-2.0 * T * rate) * uT_gevrey
    data_source = (math.pi**2 * T * theta2 + D_bar**2) * (M + 1) / n + math.exp(-2.0 * T * rate) * g_gevrey

    realized_b0 = params.b0 if b0 is None else b0
    pi_value = None
    h_beta_bound = None
    if realized_b0 is not None and realized_b0 > 0:
        ratio = 8.0 / realized_b0
        pi_value = (
            (math.pi**2 * V2 + C_bar**2 + ratio * math.pi**2 * T**3 * theta2 + ratio * T * D_bar**2)
            * (M ** (2.0 * beta + 1.0) + rate) * growth / n
        )
        pi_value += 4.0 * growth * eps2 * T**2 * u_h2beta / realized_b0
        pi_value += uT_gevrey + ratio * T * g_gevrey + ratio * T * params.a0**2 * u_gevrey
        h_beta_bound = (np.exp(-2.0 * rate * times) * np.exp(ratio * K**2 * (T - times)) * pi_value).tolist()
    else:
        print("[INFO] H^beta estimate not applicable: b0 <= 0 or unknown", file=sys.stderr)

    return QRBounds(
        phi=phi,
        pi=pi_value,
        times=times.tolist(),
        l2_bound=l2_bound.tolist(),
        h_beta_bound=h_beta_bound,
        initial_time_bound=initial_time,
        data_final_bound=data_final,
        data_source_bound=data_source,
        constants={
            "C_bar": C_bar,
            "D_bar": D_bar,
            "K": K,
            "uT_gevrey_sq": uT_gevrey,
            "u_gevrey_sq": u_gevrey,
            "g_gevrey_sq": g_gevrey,
            "u_h2beta_sq": u_h2beta,
            "dudt_sq": dudt_sup,
        },
    )
