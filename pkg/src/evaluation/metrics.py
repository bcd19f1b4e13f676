"""Accuracy metric for missing-entry prediction"""

from __future__ import annotations

import numpy as np

from src.errors import DataError
from src.shdi.matrix import ShdiMatrix
from src.solver.state import FactorState


def root_mean_square_error(observed: np.ndarray, predicted: np.ndarray) -> float:
    observed = np.asarray(observed, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if observed.size == 0:
        raise DataError("RMSE over an empty set of entries")
    if observed.shape != predicted.shape:
        raise DataError(f"shape mismatch {observed.shape} vs {predicted.shape}")
    return float(np.sqrt(np.mean((observed - predicted) ** 2)))


def rmse(truth: ShdiMatrix, model: FactorState) -> float:
    """RMSE of <a_m, a_n> against every known entry of `truth`."""
    if truth.node_count > model.node_count:
        raise DataError(
            f"truth indexes {truth.node_count} nodes, model has {model.node_count}"
        )
    return root_mean_square_error(truth.weights, model.predict_pairs(truth.heads, truth.tails))
