"""Factor matrices X, A, W and the per-entry residual cache"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.shdi.matrix import ShdiMatrix
from src.solver.params import TrainConfig


@dataclass
class FactorState:
    X: np.ndarray  # unconstrained LFs
    A: np.ndarray  # nonnegative output LFs
    W: np.ndarray  # Lagrangian multipliers
    # r_e = y_e - <x_m, x_n> for every known edge of the training matrix
    residual: np.ndarray | None = None
    sweeps: int = 0

    @property
    def node_count(self) -> int:
        return int(self.A.shape[0])

    @property
    def rank(self) -> int:
        return int(self.A.shape[1])

    def copy(self) -> FactorState:
        return FactorState(
            X=self.X.copy(),
            A=self.A.copy(),
            W=self.W.copy(),
            residual=None if self.residual is None else self.residual.copy(),
            sweeps=self.sweeps,
        )

    def predict_pairs(self, heads: np.ndarray, tails: np.ndarray) -> np.ndarray:
        """Batch of <a_m, a_n>; never negative since A >= 0."""
        return np.einsum("ij,ij->i", self.A[heads], self.A[tails])

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.X).all() and np.isfinite(self.A).all() and np.isfinite(self.W).all()
        )


def compute_residuals(X: np.ndarray, mat: ShdiMatrix) -> np.ndarray:
    return mat.weights - np.einsum("ij,ij->i", X[mat.heads], X[mat.tails])


def refresh_residuals(state: FactorState, mat: ShdiMatrix) -> None:
    state.residual = compute_residuals(state.X, mat)


def init_state(mat: ShdiMatrix, cfg: TrainConfig) -> FactorState:
    """X uniform on (0, init_scale], A = X, W = 0; deterministic per seed."""
    rng = np.random.default_rng(cfg.seed)
    X = cfg.init_scale * (1.0 - rng.random((mat.node_count, cfg.rank)))
    state = FactorState(X=X, A=X.copy(), W=np.zeros_like(X))
    refresh_residuals(state, mat)
    return state
