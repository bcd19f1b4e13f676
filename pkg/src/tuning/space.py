"""Search box over {lambda, gamma, mu, eta} and TPE settings"""

from __future__ import annotations

import math
from typing import Literal

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from src.solver.params import HyperParams

Scale = Literal["log", "linear"]

PARAM_NAMES = ("lambda", "gamma", "mu", "eta")


class ParamRange(BaseModel):
    """Bounds of one parameter; TPE works in log coordinates for log-scale ranges."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lower: PositiveFloat
    upper: PositiveFloat
    scale: Scale = "log"

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if not self.lower < self.upper:
            raise ValueError(f"lower {self.lower} must be below upper {self.upper}")
        return self

    def to_scale(self, value: float | np.ndarray) -> float | np.ndarray:
        return np.log(value) if self.scale == "log" else value

    def from_scale(self, value: float | np.ndarray) -> float | np.ndarray:
        return np.exp(value) if self.scale == "log" else value

    @property
    def bounds(self) -> tuple[float, float]:
        """Bounds in scale coordinates."""
        if self.scale == "log":
            return math.log(self.lower), math.log(self.upper)
        return self.lower, self.upper

    @property
    def width(self) -> float:
        lo, hi = self.bounds
        return hi - lo

    def clip(self, value: float) -> float:
        return min(max(value, self.lower), self.upper)


class SearchSpace(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    lambda_: ParamRange = Field(
        default_factory=lambda: ParamRange(lower=2.0**-10, upper=2.0**2), alias="lambda"
    )
    gamma: ParamRange = Field(default_factory=lambda: ParamRange(lower=2.0**-10, upper=2.0**2))
    mu: ParamRange = Field(default_factory=lambda: ParamRange(lower=2.0**-10, upper=2.0**2))
    eta: ParamRange = Field(default_factory=lambda: ParamRange(lower=2.0**-6, upper=2.0**1))

    def ranges(self) -> tuple[ParamRange, ParamRange, ParamRange, ParamRange]:
        return (self.lambda_, self.gamma, self.mu, self.eta)

    def make(self, values: tuple[float, float, float, float]) -> HyperParams:
        """HyperParams from raw values, clipped into the box against round-off."""
        clipped = [r.clip(float(v)) for r, v in zip(self.ranges(), values, strict=True)]
        return HyperParams(**dict(zip(PARAM_NAMES, clipped, strict=True)))

    def contains(self, hp: HyperParams) -> bool:
        return all(
            r.lower <= v <= r.upper for r, v in zip(self.ranges(), hp.as_tuple(), strict=True)
        )


class TpeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_trials: PositiveInt = 60
    n_startup: PositiveInt = 20
    n_candidates: PositiveInt = 24
    theta: float = Field(0.25, gt=0.0, lt=1.0)
    trial_budget_iters: PositiveInt = 200
