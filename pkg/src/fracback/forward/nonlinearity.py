"""Catalog of nonlinearities F(u) and their pseudospectral evaluation."""
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from fracback.errors import ParameterValidationError
from fracback.spectral import MidpointTransform


def _constant_profile(value: float) -> Callable[[float], float]:
    return lambda q: value


@dataclass(frozen=True)
class Nonlinearity:
    """Pointwise nonlinearity with its Lipschitz data.

    lipschitz is the global constant K (math.inf when F is only locally
    Lipschitz); profile gives K(Q) on [-Q, Q].
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    profile: Callable[[float], float]
    sup_norm: Optional[float] = None
    zero: bool = field(default=False, compare=False)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.func(u)

    def local_lipschitz(self, q: float) -> float:
        if q <= 0:
            raise ParameterValidationError(f"clamp level must be positive, got {q}")
        return self.profile(q)

    @property
    def globally_lipschitz(self) -> bool:
        return math.isfinite(self.lipschitz)

    def at_zero(self) -> float:
        return float(self.func(np.zeros(1))[0])

    def scaled(self, c: float) -> "Nonlinearity":
        """The nonlinearity c * F."""
        if c == 1.0:
            return self
        func, profile = self.func, self.profile
        return replace(
            self,
            name=f"{c:g}*{self.name}",
            func=lambda u: c * func(u),
            lipschitz=abs(c) * self.lipschitz,
            profile=lambda q: abs(c) * profile(q),
            sup_norm=None if self.sup_norm is None else abs(c) * self.sup_norm,
            zero=self.zero or c == 0.0,
        )


def nonlinearity_catalog() -> List[Nonlinearity]:
    """Named nonlinearities available to problem instances."""
    return [
        Nonlinearity(
            name="zero",
            func=np.zeros_like,
            lipschitz=0.0,
            profile=_constant_profile(0.0),
            sup_norm=0.0,
            zero=True,
        ),
        Nonlinearity(
            name="sin",
            func=np.sin,
            lipschitz=1.0,
            profile=_constant_profile(1.0),
            sup_norm=1.0,
        ),
        # u/(1+u^2): derivative (1-u^2)/(1+u^2)^2 peaks at 1 when u = 0
        Nonlinearity(
            name="logistic",
            func=lambda u: u / (1.0 + u * u),
            lipschitz=1.0,
            profile=_constant_profile(1.0),
            sup_norm=0.5,
        ),
        Nonlinearity(
            name="cubic",
            func=lambda u: u - u**3,
            lipschitz=math.inf,
            profile=lambda q: max(1.0, 3.0 * q * q - 1.0),
        ),
    ]


def get_nonlinearity(name: str, scale: float = 1.0) -> Nonlinearity:
    """Catalog nonlinearity by name, multiplied by scale."""
    catalog: Dict[str, Nonlinearity] = {item.name: item for item in nonlinearity_catalog()}
    if name not in catalog:
        raise ParameterValidationError(
            f"Unknown nonlinearity '{name}', expected one of {sorted(catalog)}"
        )
    return catalog[name].scaled(scale)


class PseudospectralMap:
    """Coefficients of F(u) from coefficients of u.

    u is sampled at midpoint nodes (at least 2*cap+2 of them), F is applied
    pointwise and the result is projected back onto modes 0..cap_out.
    """

    def __init__(self, nonlinearity: Nonlinearity, cap_in: int, cap_out: Optional[int] = None,
                 min_nodes: int = 64):
        self.nonlinearity = nonlinearity
        self.cap_in = cap_in
        self.cap_out = cap_in if cap_out is None else cap_out
        nodes = max(2 * max(self.cap_in, self.cap_out) + 2, min_nodes)
        self._sample = MidpointTransform(nodes, self.cap_in)
        self._project = MidpointTransform(nodes, self.cap_out)

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        shape = coeffs.shape[:-1] + (self.cap_out + 1,)
        if self.nonlinearity.zero:
            return np.zeros(shape)
        values = self.nonlinearity(self._sample.synthesize(coeffs))
        return self._project.project(values)
