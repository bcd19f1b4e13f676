"""
Proximal ADMM learning rules for symmetric nonnegative latent factors.

One sweep runs f column subtasks in ascending order. Subtask d updates
column d of X (Jacobi within the column: every neighbor value comes from a
snapshot taken before the column is written), then column d of A by
nonnegative truncation, then column d of W by a dual ascent step. Columns
< d already hold their new values when subtask d starts.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from src.errors import DataError, DivergenceError
from src.evaluation.metrics import rmse
from src.shdi.matrix import ShdiMatrix
from src.solver.params import HyperParams, TrainConfig
from src.solver.state import FactorState, init_state, refresh_residuals

logger = logging.getLogger(__name__)

# Denominator floor of the reported ||X - A|| / ||X|| ratio only
GAP_FLOOR = 1e-12

StopReason = Literal["max_iters", "tol"]


@dataclass
class TrainReport:
    iterations_run: int = 0
    rmse_history: list[float] = field(default_factory=list)
    stop_reason: StopReason = "max_iters"
    final_gap: float = 0.0
    wall_time: float = 0.0
    initial_rmse: float = float("nan")

    @property
    def final_rmse(self) -> float:
        return self.rmse_history[-1] if self.rmse_history else self.initial_rmse


def alpha(hp: HyperParams, degree: int) -> float:
    """Augmentation coefficient gamma * |Λ(u)|, floored at one neighbor."""
    return hp.gamma * max(1, degree)


def alphas(hp: HyperParams, degrees: np.ndarray) -> np.ndarray:
    return hp.gamma * np.maximum(1, degrees).astype(np.float64)


def _ensure_residuals(state: FactorState, mat: ShdiMatrix) -> np.ndarray:
    if state.residual is None or state.residual.shape != (mat.edge_count,):
        refresh_residuals(state, mat)
    assert state.residual is not None
    return state.residual


def update_column_x(
    state: FactorState,
    mat: ShdiMatrix,
    hp: HyperParams,
    cfg: TrainConfig,
    d: int,
    alpha_vec: np.ndarray | None = None,
) -> np.ndarray:
    """
    Closed-form minimizer of the objective over x_{m,d} for every m at once.

    Uses y_{m,n} - sum_{l != d} x_{m,l} x_{n,l} = r_{m,n} + x_{m,d} x_{n,d}
    so the column update is two sparse products against the residual cache.
    """
    residual = _ensure_residuals(state, mat)
    a = alphas(hp, mat.degrees) if alpha_vec is None else alpha_vec
    mu = cfg.effective_mu(hp)

    snapshot = state.X[:, d].copy()
    squares = mat.pattern @ (snapshot * snapshot)
    numerator = (
        mat.slot_matrix(residual) @ snapshot
        + snapshot * squares
        + a * state.A[:, d]
        - state.W[:, d]
        + mu * snapshot
    )
    denominator = squares + hp.lambda_ * mat.degrees + a + mu
    if not np.all(denominator > 0):
        raise DivergenceError(
            f"non-positive X-update denominator in column {d}; hyperparameters are corrupted"
        )
    updated = numerator / denominator

    heads, tails = mat.heads, mat.tails
    residual += snapshot[heads] * snapshot[tails] - updated[heads] * updated[tails]
    state.X[:, d] = updated
    return updated


def update_column_a(
    state: FactorState,
    mat: ShdiMatrix,
    hp: HyperParams,
    d: int,
    alpha_vec: np.ndarray | None = None,
) -> np.ndarray:
    a = alphas(hp, mat.degrees) if alpha_vec is None else alpha_vec
    state.A[:, d] = np.maximum(0.0, state.X[:, d] + state.W[:, d] / a)
    return state.A[:, d]


def update_column_w(
    state: FactorState,
    mat: ShdiMatrix,
    hp: HyperParams,
    d: int,
    alpha_vec: np.ndarray | None = None,
) -> np.ndarray:
    a = alphas(hp, mat.degrees) if alpha_vec is None else alpha_vec
    state.W[:, d] += hp.eta * a * (state.X[:, d] - state.A[:, d])
    return state.W[:, d]


def sweep(state: FactorState, mat: ShdiMatrix, hp: HyperParams, cfg: TrainConfig) -> FactorState:
    """One iteration k -> k+1 over all f column subtasks."""
    a = alphas(hp, mat.degrees)
    for d in range(state.rank):
        update_column_x(state, mat, hp, cfg, d, a)
        update_column_a(state, mat, hp, d, a)
        update_column_w(state, mat, hp, d, a)
    state.sweeps += 1
    if state.sweeps % cfg.refresh_every == 0:
        refresh_residuals(state, mat)
    return state


def constraint_gap(state: FactorState) -> float:
    """||X - A||_F / max(||X||_F, GAP_FLOOR)"""
    return float(np.linalg.norm(state.X - state.A) / max(np.linalg.norm(state.X), GAP_FLOOR))


def _check_compatible(mat_train: ShdiMatrix, mat_valid: ShdiMatrix) -> None:
    if mat_train.node_count != mat_valid.node_count:
        raise DataError(
            f"train has {mat_train.node_count} nodes, validation has {mat_valid.node_count}"
        )
    if mat_valid.edge_count == 0:
        raise DataError("validation set is empty")
    shared = np.intersect1d(mat_train.pair_keys(), mat_valid.pair_keys())
    if shared.size:
        raise DataError(f"train and validation share {shared.size} entries")


def train(
    mat_train: ShdiMatrix,
    mat_valid: ShdiMatrix,
    hp: HyperParams,
    cfg: TrainConfig,
    state: FactorState | None = None,
) -> tuple[FactorState, TrainReport]:
    """
    Sweep until the validation RMSE (computed with A) moves by less than
    `tol` between consecutive iterations, or `max_iters` sweeps have run.

    Passing `state` resumes from a checkpoint instead of a fresh start.
    """
    _check_compatible(mat_train, mat_valid)
    started = time.perf_counter()
    if state is None:
        state = init_state(mat_train, cfg)
    else:
        if state.A.shape != (mat_train.node_count, cfg.rank):
            raise DataError(
                f"checkpoint shape {state.A.shape} does not match "
                f"({mat_train.node_count}, {cfg.rank})"
            )
        refresh_residuals(state, mat_train)

    report = TrainReport(initial_rmse=rmse(mat_valid, state))
    previous = report.initial_rmse
    for k in range(1, cfg.max_iters + 1):
        sweep(state, mat_train, hp, cfg)
        current = rmse(mat_valid, state)
        if not (state.is_finite() and np.isfinite(current)):
            logger.warning("Diverged at sweep %d (%s)", k, hp.as_tuple())
            raise DivergenceError(
                f"non-finite factors after sweep {k}; try a smaller eta or a larger mu"
            )
        report.rmse_history.append(current)
        report.iterations_run = k
        logger.debug("sweep %d: validation RMSE %.8f", k, current)
        if abs(current - previous) < cfg.tol:
            report.stop_reason = "tol"
            break
        previous = current

    report.final_gap = constraint_gap(state)
    report.wall_time = time.perf_counter() - started
    logger.info(
        "Trained rank %d in %d sweeps (%s): RMSE %.6f, gap %.3e, %.2fs",
        cfg.rank,
        report.iterations_run,
        report.stop_reason,
        report.final_rmse,
        report.final_gap,
        report.wall_time,
    )
    return state, report


def predict(state: FactorState, m: int, n: int) -> float:
    """y_hat_{m,n} = sum_d a_{m,d} a_{n,d}; exactly symmetric in (m, n)."""
    if not (0 <= m < state.node_count and 0 <= n < state.node_count):
        raise IndexError(f"pair ({m}, {n}) out of range [0, {state.node_count})")
    return float(np.sum(state.A[m] * state.A[n]))


def evaluate_objective(
    state: FactorState,
    mat: ShdiMatrix,
    hp: HyperParams,
    anchor: np.ndarray,
    cfg: TrainConfig | None = None,
) -> float:
    """
    Augmented Lagrangian with the proximal term anchored at `anchor` (X^k).

    The data term runs over both ordered mentions of each undirected pair,
    so an off-diagonal pair counts twice and a self-loop once. Diagnostic
    only; training never calls it.
    """
    X, A, W = state.X, state.A, state.W
    heads, tails = mat.heads, mat.tails
    mu = hp.mu if cfg is None else cfg.effective_mu(hp)
    mentions = np.where(heads == tails, 1.0, 2.0)

    errors = mat.weights - np.einsum("ij,ij->i", X[heads], X[tails])
    penalty = np.sum(X[heads] ** 2, axis=1) + np.sum(X[tails] ** 2, axis=1)
    loss = 0.5 * np.sum(mentions * (errors**2 + hp.lambda_ * penalty))

    gap = X - A
    a = alphas(hp, mat.degrees)
    augmentation = np.sum(W * gap) + np.sum(0.5 * a * np.sum(gap**2, axis=1))
    proximal = 0.5 * mu * np.sum((X - anchor) ** 2)
    return float(loss + augmentation + proximal)
