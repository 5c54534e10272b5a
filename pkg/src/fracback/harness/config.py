"""Experiment configuration loaded from flat key-value files."""
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fracback.errors import ParameterValidationError
from fracback.noise import NoiseSpec

Method = Literal["first_truncation", "second_truncation", "quasi_reversibility"]


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _split_modes(value: Any) -> Any:
    if isinstance(value, str):
        modes = {}
        for item in _split_list(value):
            p, _, c = item.partition(":")
            if not c:
                raise ValueError(f"mode entry '{item}' must look like p:coefficient")
            modes[int(p)] = float(c)
        return modes
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemConfig(_Section):
    """Ground-truth problem."""
    name: str = Field(default="default", description="Label written into reports")
    beta: float = Field(default=1.0, gt=0.5, description="Fractional order")
    T: float = Field(default=1.0, gt=0.0, description="Final time")
    cap: int = Field(default=16, ge=1, description="Series cap of the ground truth")
    nonlinearity: str = Field(default="sin", description="Catalog name: zero, sin, logistic, cubic")
    nonlinearity_scale: float = Field(default=1.0, description="Constant multiplying F")
    initial_modes: Dict[int, float] = Field(default_factory=lambda: {1: 1.0}, description="u_0 as p:c pairs")
    source_modes: Dict[int, float] = Field(default_factory=dict, description="g spatial part as p:c pairs")
    source_profile: Literal["constant", "decay", "ramp"] = Field(default="constant", description="Time profile of g")
    coefficient: Literal["constant", "oscillating"] = Field(default="constant", description="Family of a(t)")
    coefficient_base: float = Field(default=1.0, gt=0.0, description="Mean level of a(t)")
    coefficient_amplitude: float = Field(default=0.0, ge=0.0, description="Oscillation amplitude of a(t)")
    coefficient_frequency: float = Field(default=1.0, description="Angular frequency of a(t)")
    a0: float = Field(default=1.0, gt=0.0, description="Declared upper bound of a(t)")

    @field_validator("initial_modes", "source_modes", mode="before")
    @classmethod
    def parse_modes(cls, value: Any) -> Any:
        return _split_modes(value)


class NoiseConfig(_Section):
    """Observation noise."""
    sigma: Union[float, List[float]] = Field(
        default=0.05, description="Standard deviation of every sigma_k, or one value per node"
    )
    v_max: float = Field(default=0.1, gt=0.0, description="Declared bound V_max")
    vartheta: float = Field(default=0.0, ge=0.0, description="Source noise amplitude")
    eps: float = Field(default=0.0, ge=0.0, description="Coefficient noise amplitude")

    @field_validator("sigma", mode="before")
    @classmethod
    def parse_sigma(cls, value: Any) -> Any:
        if isinstance(value, str) and "," in value:
            return _split_list(value)
        return value

    @field_validator("sigma")
    @classmethod
    def check_sigma(cls, value: Union[float, List[float]]) -> Union[float, List[float]]:
        if min(np.atleast_1d(value)) < 0.0:
            raise ValueError("noise deviations must be nonnegative")
        return value


class RegularizerConfig(_Section):
    """Regularization parameters."""
    sigma_rate: float = Field(default=0.9, gt=0.0, lt=1.0, description="Rate exponent sigma")
    M_n: Optional[int] = Field(default=None, ge=1, description="Fixed cutoff; default follows the cutoff rule")
    Q_n: Optional[float] = Field(default=None, gt=0.0, description="Fixed clamp level; default follows the clamp rule")
    picard_tol: float = Field(default=1e-10, gt=0.0, description="Fixed-point tolerance")
    picard_max_iters: int = Field(default=200, ge=1, description="Fixed-point iteration cap")
    alpha: Optional[float] = Field(default=None, gt=0.0, description="Use the (ass2) estimate with this alpha")
    gamma: float = Field(default=1.5, gt=1.0, description="Source smoothness order")
    delta: float = Field(default=2.0, gt=1.0, description="Final-value smoothness order")


class GridConfig(_Section):
    """Time discretization."""
    steps: int = Field(default=200, ge=1, description="Number of time steps on [0, T]")


class RunConfig(_Section):
    """Monte Carlo run controls."""
    method: Method = Field(default="first_truncation", description="Regularizer")
    n: int = Field(default=64, ge=3, description="Number of spatial samples")
    trials: int = Field(default=20, ge=1, description="Monte Carlo trial count R")
    sweep: List[int] = Field(default_factory=lambda: [64, 256, 1024], description="Sample counts of a rate sweep")
    eval_times: List[float] = Field(default_factory=list, description="Evaluation times; default T/2, T")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed")
    workers: int = Field(default=1, ge=1, description="Concurrent trial workers")
    output_dir: str = Field(default="results", description="Directory for reports")

    @field_validator("sweep", "eval_times", mode="before")
    @classmethod
    def parse_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("sweep")
    @classmethod
    def check_sweep(cls, value: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("sweep list must be strictly increasing")
        return value


class ExperimentConfig(_Section):
    """Complete experiment description."""
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    regularizer: RegularizerConfig = Field(default_factory=RegularizerConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    run: RunConfig = Field(default_factory=RunConfig)

    @model_validator(mode="after")
    def check_times(self) -> "ExperimentConfig":
        for t in self.run.eval_times:
            if not 0.0 <= t <= self.problem.T:
                raise ValueError(f"evaluation time {t} outside [0, {self.problem.T}]")
        return self

    @property
    def eval_times(self) -> List[float]:
        return self.run.eval_times or [self.problem.T / 2.0, self.problem.T]

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.problem.T, self.grid.steps + 1)

    def noise_spec(self) -> NoiseSpec:
        noise = self.noise
        return NoiseSpec(sigma=noise.sigma, v_max=noise.v_max, vartheta=noise.vartheta, eps=noise.eps,
                         seed=self.run.seed)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with dotted-key overrides, validated again."""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is not None:
                _assign(data, key, value)
        return ExperimentConfig.model_validate(data)

    def with_env(self) -> "ExperimentConfig":
        """Apply FRACBACK_SEED and FRACBACK_WORKERS from the environment."""
        return self.with_overrides(**{
            "run.seed": os.getenv("FRACBACK_SEED"),
            "run.workers": os.getenv("FRACBACK_WORKERS"),
        })

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        data: Dict[str, Any] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ParameterValidationError(f"line {number}: expected 'key = value', got '{raw.strip()}'")
            _assign(data, key.strip(), value.strip())
        return cls.model_validate(data)

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        path = Path(path)
        print(f"[INFO] Loading configuration from {path}", file=sys.stderr)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            error_msg = f"Cannot read configuration {path}: {e}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)
        return cls.from_text(text)

    @classmethod
    def schema_lines(cls) -> List[str]:
        """Documented key list: 'key (type, default) description'."""
        return [f"{key} = {default!r}  # {description}" for key, default, description in _walk(cls)]


def _assign(data: Dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ParameterValidationError(f"key '{dotted}' nests under a scalar")
    node[parts[-1]] = value


def _walk(model: type[BaseModel], prefix: str = "") -> Iterator[Tuple[str, Any, str]]:
    for name, info in model.model_fields.items():
        annotation = info.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel):
            yield from _walk(annotation, f"{prefix}{name}.")
            continue
        default = info.get_default(call_default_factory=True)
        yield f"{prefix}{name}", default, info.description or ""
