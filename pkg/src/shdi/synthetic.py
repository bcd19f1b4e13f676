"""Seeded synthetic SHDI matrices with known nonnegative low-rank structure"""

from __future__ import annotations

import numpy as np

from src.shdi.matrix import ShdiMatrix


def make_synthetic(
    n_nodes: int,
    rank: int,
    density: float,
    noise: float = 0.0,
    seed: int = 0,
    include_diagonal: bool = True,
) -> tuple[ShdiMatrix, np.ndarray]:
    """
    Draw A* with entries uniform on [0, 1], set Y = A* A*^T (+ Gaussian noise,
    clipped at 0) and observe each upper-triangle pair with probability `density`.

    Returns the observed matrix and A*.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    truth = rng.random((n_nodes, rank))
    offset = 0 if include_diagonal else 1
    heads, tails = np.triu_indices(n_nodes, k=offset)
    observed = rng.random(heads.size) < density
    if not observed.any():
        observed[rng.integers(heads.size)] = True
    heads, tails = heads[observed], tails[observed]
    weights = np.einsum("ij,ij->i", truth[heads], truth[tails])
    if noise > 0:
        weights = np.maximum(weights + rng.normal(0.0, noise, size=weights.size), 0.0)
    labels = tuple(str(i) for i in range(n_nodes))
    return ShdiMatrix(n_nodes, heads, tails, weights, labels), truth
