"""Hyperparameters and training configuration"""

from __future__ import annotations

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
)


class HyperParams(BaseModel):
    """The tuned quadruple s = {lambda, gamma, mu, eta}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    lambda_: PositiveFloat = Field(0.02, alias="lambda")
    gamma: PositiveFloat = 0.1
    mu: PositiveFloat = 1.0
    eta: PositiveFloat = 1.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lambda_, self.gamma, self.mu, self.eta)


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", ser_json_inf_nan="constants")

    rank: PositiveInt = 20
    max_iters: PositiveInt = 1000
    # |RMSE_k - RMSE_{k-1}| < tol stops; 0 disables, inf stops after one sweep
    tol: NonNegativeFloat = 1e-5
    seed: NonNegativeInt = 0
    init_scale: PositiveFloat = 0.05
    ablate_proximal: bool = False
    refresh_every: PositiveInt = 50

    def effective_mu(self, hp: HyperParams) -> float:
        return 0.0 if self.ablate_proximal else hp.mu
