"""Report models of the experiment harness."""
import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from fracback.picard import PicardDiagnostics
from fracback.truncation import BudgetEstimate

Metric = Literal["l2", "h_beta", "t_n"]


class SmoothnessAssumptions(BaseModel):
    """Which smoothness claims a scenario makes, with their exponents."""
    ass1: bool = Field(default=False, description="sup_t sum e^{2 p^{2 beta} t} u_p^2 finite")
    ass2: bool = Field(default=False, description="sup_t sum p^{2 beta alpha} e^{2 p^{2 beta} t} u_p^2 finite")
    assu2: bool = Field(default=False, description="sup_t ||g(t)||_{H^gamma} finite")
    v_tilde: bool = Field(default=False, description="u and g bounded in the Gevrey-weighted space")
    gamma: float = Field(default=1.5, gt=1.0, description="Source smoothness order")
    alpha: Optional[float] = Field(default=None, gt=0.0, description="Extra smoothness of (ass2)")
    delta: float = Field(default=2.0, gt=1.0, description="Final-value smoothness order")

    @model_validator(mode="after")
    def check_alpha(self) -> "SmoothnessAssumptions":
        if self.ass2 and self.alpha is None:
            raise ValueError("claim ass2 needs alpha")
        return self


class AssumptionReport(BaseModel):
    """Budgets computed up to cap for every claimed assumption."""
    cap: int
    budgets: Dict[str, BudgetEstimate] = Field(default_factory=dict)
    E1: Optional[float] = Field(default=None, description="E/T + E when F is globally Lipschitz")
    all_verified: bool = Field(default=True)

    @property
    def unverified(self) -> List[str]:
        return sorted(name for name, budget in self.budgets.items() if not budget.verified)


class TrialReport(BaseModel):
    """Errors of one Monte Carlo trial at the evaluation times."""
    trial: int = Field(..., ge=0)
    seed: int = Field(..., description="Master seed; streams are keyed by (seed, purpose, trial)")
    method: str
    n: int
    M_n: int
    times: List[float]
    l2_errors: List[float] = Field(..., description="||U(t) - u(t)||_{L2} at each evaluation time")
    h_beta_errors: Optional[List[float]] = Field(default=None, description="Energy-form H^beta errors (QR only)")
    b0: float = Field(..., description="Realized min of a0 minus the observed coefficient")
    t_n: Optional[float] = None
    error_at_t_n: Optional[float] = Field(default=None, description="||W(t_n) - u(0)||_{L2} (QR only)")
    diagnostics: PicardDiagnostics
    flags: Dict[str, bool] = Field(default_factory=dict)

    @field_validator("l2_errors", "h_beta_errors")
    @classmethod
    def check_errors(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(not math.isfinite(v) or v < 0 for v in value):
            raise ValueError("errors must be finite and nonnegative")
        return value


class MiseRow(BaseModel):
    t: float
    metric: Metric
    mise: float
    stderr: Optional[float] = Field(default=None, description="None when fewer than two trials ran")
    bound: Optional[float] = None


class MiseEstimate(BaseModel):
    """Sample mean of squared errors over R trials, with the matching estimate."""
    method: str
    n: int
    M_n: int
    trials: int
    seed: int
    rows: List[MiseRow] = Field(default_factory=list)
    assumptions: Optional[AssumptionReport] = None
    flagged_trials: List[int] = Field(default_factory=list, description="Trials whose coefficient left (0, a0]")
    notes: List[str] = Field(default_factory=list)

    def row(self, t: float, metric: Metric = "l2") -> MiseRow:
        for row in self.rows:
            if row.metric == metric and math.isclose(row.t, t, rel_tol=0.0, abs_tol=1e-12):
                return row
        raise KeyError(f"no {metric} row at t={t}")


class SlopeFit(BaseModel):
    """Least-squares slope of log MISE against log n."""
    t: float
    slope: Optional[float] = None
    intercept: Optional[float] = None
    predicted: float = Field(..., description="-sigma t / T")
    within_band: Optional[bool] = Field(default=None, description="Slope within 50% of the prediction")
    degenerate: bool = Field(default=False, description="MISE rises with n beyond Monte Carlo noise")
    noise_free_floor: bool = Field(default=False, description="No noise: slope reflects discretization floors only")


class SweepRow(BaseModel):
    n: int
    M_n: int
    t: float
    mise: float
    stderr: Optional[float] = None
    bound: Optional[float] = None
    slope: Optional[float] = None


class SweepResult(BaseModel):
    method: str
    sigma_rate: float
    rows: List[SweepRow] = Field(default_factory=list)
    fits: List[SlopeFit] = Field(default_factory=list)
    estimates: List[MiseEstimate] = Field(default_factory=list)

    def fit(self, t: float) -> SlopeFit:
        for fit in self.fits:
            if math.isclose(fit.t, t, rel_tol=0.0, abs_tol=1e-12):
                return fit
        raise KeyError(f"no slope fit at t={t}")


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
