from __future__ import annotations

import pytest

from src.shdi.matrix import ShdiMatrix
from src.shdi.synthetic import make_synthetic
from src.solver.params import HyperParams, TrainConfig


@pytest.fixture
def triangle() -> ShdiMatrix:
    """Edges 0-1 and 1-2, a self-loop on 2; node 3 isolated."""
    return ShdiMatrix.from_triples(4, [(0, 1, 0.5), (1, 2, 0.2), (2, 2, 1.0)])


@pytest.fixture
def small_synthetic() -> ShdiMatrix:
    mat, _ = make_synthetic(30, rank=3, density=0.3, seed=7)
    return mat


@pytest.fixture
def hp() -> HyperParams:
    return HyperParams()


@pytest.fixture
def fast_cfg() -> TrainConfig:
    return TrainConfig(rank=3, max_iters=20, tol=0.0, seed=1)
