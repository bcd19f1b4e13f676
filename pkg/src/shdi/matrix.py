"""
Symmetric, high-dimensional, incomplete (SHDI) matrix built from an undirected edge list.

Known entries are stored once per undirected pair, canonically with m <= n.
The symmetric view (both mirror positions, the diagonal once) is exposed as
"slots": one slot per element of Λ(u) for every node u.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from scipy import sparse

from src.errors import DataError


@dataclass(frozen=True)
class Edge:
    """One known entry y_{m,n}, canonical (m <= n)."""
    m: int
    n: int
    y: float


@dataclass(frozen=True, eq=False)
class ShdiMatrix:
    node_count: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise DataError(f"node_count must be positive, got {self.node_count}")
        if len(self.labels) != self.node_count:
            raise DataError(
                f"{len(self.labels)} labels for {self.node_count} nodes"
            )
        heads = np.ascontiguousarray(self.heads, dtype=np.int64)
        tails = np.ascontiguousarray(self.tails, dtype=np.int64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if not (heads.shape == tails.shape == weights.shape) or heads.ndim != 1:
            raise DataError("heads, tails and weights must be 1-d arrays of equal length")
        if heads.size:
            if heads.min() < 0 or tails.max() >= self.node_count:
                raise DataError("edge index out of range")
            if np.any(heads > tails):
                raise DataError("edges must be canonical (m <= n)")
            keys = heads * self.node_count + tails
            if np.any(np.diff(keys) <= 0):
                raise DataError("edges must be sorted and free of duplicate pairs")
            if not np.all(np.isfinite(weights)) or weights.min() < 0:
                raise DataError("weights must be finite and nonnegative")
        for arr in (heads, tails, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_triples(
        cls,
        node_count: int,
        triples: Iterable[tuple[int, int, float]],
        labels: Sequence[str] | None = None,
    ) -> ShdiMatrix:
        """Build from (m, n, y) triples in any orientation; duplicate pairs are an error."""
        seen: dict[tuple[int, int], float] = {}
        for m, n, y in triples:
            key = (min(m, n), max(m, n))
            if key in seen:
                raise DataError(f"duplicate pair {key}")
            seen[key] = float(y)
        keys = sorted(seen)
        heads = np.array([k[0] for k in keys], dtype=np.int64)
        tails = np.array([k[1] for k in keys], dtype=np.int64)
        weights = np.array([seen[k] for k in keys], dtype=np.float64)
        if labels is None:
            labels = [str(i) for i in range(node_count)]
        return cls(node_count, heads, tails, weights, tuple(labels))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShdiMatrix):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.labels == other.labels
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def edge_count(self) -> int:
        return int(self.heads.size)

    @cached_property
    def id_map(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(
            Edge(int(m), int(n), float(y))
            for m, n, y in zip(self.heads, self.tails, self.weights, strict=True)
        )

    @cached_property
    def _slots(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        off = self.heads != self.tails
        index = np.arange(self.edge_count, dtype=np.int64)
        rows = np.concatenate([self.heads, self.tails[off]])
        cols = np.concatenate([self.tails, self.heads[off]])
        owner = np.concatenate([index, index[off]])
        order = np.lexsort((cols, rows))
        return rows[order], cols[order], owner[order]

    @property
    def slot_rows(self) -> np.ndarray:
        return self._slots[0]

    @property
    def slot_cols(self) -> np.ndarray:
        return self._slots[1]

    @property
    def slot_edges(self) -> np.ndarray:
        """Edge index owning each slot (mirror slots share one edge)."""
        return self._slots[2]

    @cached_property
    def indptr(self) -> np.ndarray:
        counts = np.bincount(self.slot_rows, minlength=self.node_count)
        return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    @cached_property
    def degrees(self) -> np.ndarray:
        """|Λ(u)| for every node; a self-loop counts once."""
        return np.diff(self.indptr)

    @cached_property
    def pattern(self) -> sparse.csr_matrix:
        ones = np.ones(self.slot_cols.size, dtype=np.float64)
        return sparse.csr_matrix(
            (ones, self.slot_cols, self.indptr), shape=(self.node_count, self.node_count)
        )

    def slot_matrix(self, per_edge: np.ndarray) -> sparse.csr_matrix:
        """CSR matrix on the symmetric pattern carrying one value per edge."""
        return sparse.csr_matrix(
            (per_edge[self.slot_edges], self.slot_cols, self.indptr),
            shape=(self.node_count, self.node_count),
        )

    def neighbors(self, u: int) -> list[tuple[int, float]]:
        """Λ(u) as (neighbor, weight) pairs in ascending neighbor order."""
        if not 0 <= u < self.node_count:
            raise IndexError(f"node {u} out of range [0, {self.node_count})")
        lo, hi = self.indptr[u], self.indptr[u + 1]
        cols = self.slot_cols[lo:hi]
        ys = self.weights[self.slot_edges[lo:hi]]
        return [(int(n), float(y)) for n, y in zip(cols, ys, strict=True)]

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        return [self.neighbors(u) for u in range(self.node_count)]

    def pair_keys(self) -> np.ndarray:
        return self.heads * self.node_count + self.tails

    def subset(self, edge_indices: np.ndarray | Sequence[int]) -> ShdiMatrix:
        """Same node universe, only the given edges."""
        idx = np.unique(np.asarray(edge_indices, dtype=np.int64))
        return ShdiMatrix(
            self.node_count, self.heads[idx], self.tails[idx], self.weights[idx], self.labels
        )


def matrix_stats(mat: ShdiMatrix) -> dict[str, Any]:
    """Dataset summary: node count, known pairs and density against |U|^2."""
    self_loops = int(np.count_nonzero(mat.heads == mat.tails))
    entries = 2 * mat.edge_count - self_loops
    nodes = mat.node_count
    off_diagonal = entries - self_loops
    return {
        "nodes": nodes,
        "pairs": mat.edge_count,
        "entries": entries,
        "self_loops": self_loops,
        "isolated_nodes": int(np.count_nonzero(mat.degrees == 0)),
        "max_degree": int(mat.degrees.max()) if nodes else 0,
        "density": entries / nodes**2,
        "density_off_diagonal": off_diagonal / (nodes * (nodes - 1)) if nodes > 1 else 0.0,
        "weight_min": float(mat.weights.min()) if mat.edge_count else None,
        "weight_max": float(mat.weights.max()) if mat.edge_count else None,
        "weight_mean": float(mat.weights.mean()) if mat.edge_count else None,
    }
