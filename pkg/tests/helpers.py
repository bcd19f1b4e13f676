"""Small builders shared by several test modules"""

from __future__ import annotations

import io

import numpy as np

from src.shdi.matrix import ShdiMatrix
from src.shdi.parser import serialize_edges


def split_in_two(mat: ShdiMatrix, seed: int = 0) -> tuple[ShdiMatrix, ShdiMatrix]:
    """Random 80/20 edge split sharing the node universe."""
    order = np.random.default_rng(seed).permutation(mat.edge_count)
    cut = max(1, mat.edge_count // 5)
    return mat.subset(order[cut:]), mat.subset(order[:cut])


def tsv_text(mat: ShdiMatrix) -> str:
    out = io.StringIO()
    serialize_edges(mat, out, "tsv")
    return out.getvalue()
