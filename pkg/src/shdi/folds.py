"""K-fold partition of known entries with a cyclic train/validation/test rotation"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from src.errors import DataError
from src.shdi.matrix import ShdiMatrix

DEFAULT_FOLDS = 10


@dataclass(frozen=True, eq=False)
class FoldSplit:
    """
    Every undirected edge belongs to exactly one fold.

    Rotation r uses fold r for validation, folds r+1 and r+2 (mod k) for
    testing and the remaining k-3 folds for training.
    """
    assignment: np.ndarray  # edge index -> fold
    k: int
    seed: int | None = None

    @property
    def folds(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == f) for f in range(self.k)]

    def roles(self, rotation: int) -> tuple[list[int], int, list[int]]:
        """(train folds, validation fold, test folds) of one rotation."""
        if not 0 <= rotation < self.k:
            raise IndexError(f"rotation {rotation} out of range [0, {self.k})")
        valid = rotation
        test = [(rotation + 1) % self.k, (rotation + 2) % self.k]
        train = [f for f in range(self.k) if f != valid and f not in test]
        return train, valid, test

    def rotation(self, rotation: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edge indices for (train, validation, test) of one rotation."""
        train, valid, test = self.roles(rotation)
        return (
            np.flatnonzero(np.isin(self.assignment, train)),
            np.flatnonzero(self.assignment == valid),
            np.flatnonzero(np.isin(self.assignment, test)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FoldSplit):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignment, other.assignment)

    __hash__ = None  # type: ignore[assignment]


def kfold_split(mat: ShdiMatrix, k: int = DEFAULT_FOLDS, seed: int = 0) -> FoldSplit:
    """Shuffle undirected edges and deal them into k folds of sizes differing by at most 1."""
    if k < 3:
        raise DataError(f"need at least 3 folds for a train/validation/test rotation, got {k}")
    if mat.edge_count < k:
        raise DataError(f"{mat.edge_count} edges cannot fill {k} folds")
    order = np.random.default_rng(seed).permutation(mat.edge_count)
    assignment = np.empty(mat.edge_count, dtype=np.int64)
    for fold, members in enumerate(np.array_split(order, k)):
        assignment[members] = fold
    return FoldSplit(assignment=assignment, k=k, seed=seed)


def write_fold_file(split: FoldSplit, mat: ShdiMatrix, out: TextIO) -> None:
    for fold, m, n in zip(split.assignment, mat.heads, mat.tails, strict=True):
        out.write(f"{fold}\t{mat.labels[m]}\t{mat.labels[n]}\n")


def read_fold_file(stream: Iterable[str], mat: ShdiMatrix) -> FoldSplit:
    """Read a fold file against the matrix it was written for."""
    position = {int(key): i for i, key in enumerate(mat.pair_keys())}
    assignment = np.full(mat.edge_count, -1, dtype=np.int64)
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
        try:
            fold = int(fields[0])
            a, b = mat.id_map[fields[1]], mat.id_map[fields[2]]
        except (ValueError, KeyError):
            raise DataError(f"unreadable fold line {line!r}", line=lineno) from None
        if fold < 0:
            raise DataError(f"negative fold index {fold}", line=lineno)
        key = min(a, b) * mat.node_count + max(a, b)
        edge = position.get(key)
        if edge is None:
            raise DataError(f"pair {fields[1]}-{fields[2]} is not a known entry", line=lineno)
        if assignment[edge] != -1:
            raise DataError(f"pair {fields[1]}-{fields[2]} assigned twice", line=lineno)
        assignment[edge] = fold
    if np.any(assignment < 0):
        raise DataError(f"{int(np.count_nonzero(assignment < 0))} edges have no fold")
    k = int(assignment.max()) + 1
    if k < 3:
        raise DataError("fold indices must cover at least 0..2")
    return FoldSplit(assignment=assignment, k=k)
