"""
Text model file.

    PSNL<TAB>v1<TAB><node_count><TAB><rank>
    <node_count rows of A, tab separated>
    #LABELS
    <index><TAB><raw label>            (node_count lines)
    #CHECKPOINT<TAB><sweeps>           (optional, for resumable training)
    <node_count rows of X>
    <node_count rows of W>

Floats are written with repr(), the shortest string that round-trips.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from src.errors import DataError
from src.solver.state import FactorState

MAGIC = "PSNL"
VERSION = "v1"


@dataclass
class SavedModel:
    state: FactorState
    labels: tuple[str, ...]
    has_checkpoint: bool

    @property
    def id_map(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}


def _write_rows(out: TextIO, matrix: np.ndarray) -> None:
    for row in matrix.tolist():
        out.write("\t".join(repr(float(v)) for v in row))
        out.write("\n")


def save_model(
    out: TextIO, state: FactorState, labels: Sequence[str], checkpoint: bool = False
) -> None:
    if len(labels) != state.node_count:
        raise DataError(f"{len(labels)} labels for {state.node_count} nodes")
    out.write(f"{MAGIC}\t{VERSION}\t{state.node_count}\t{state.rank}\n")
    _write_rows(out, state.A)
    out.write("#LABELS\n")
    for i, label in enumerate(labels):
        out.write(f"{i}\t{label}\n")
    if checkpoint:
        out.write(f"#CHECKPOINT\t{state.sweeps}\n")
        _write_rows(out, state.X)
        _write_rows(out, state.W)


def _read_rows(lines: Iterator[tuple[int, str]], count: int, rank: int) -> np.ndarray:
    matrix = np.empty((count, rank), dtype=np.float64)
    for i in range(count):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise DataError(f"model file truncated after {i} of {count} rows") from None
        fields = line.rstrip("\n").split("\t")
        if len(fields) != rank:
            raise DataError(f"expected {rank} values, got {len(fields)}", line=lineno)
        try:
            matrix[i] = [float(v) for v in fields]
        except ValueError:
            raise DataError("unreadable factor value", line=lineno) from None
    return matrix


def _expect(lines: Iterator[tuple[int, str]], what: str) -> tuple[int, str]:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise DataError(f"model file truncated, expected {what}") from None
    return lineno, line.rstrip("\n")


def load_model(stream: Iterable[str]) -> SavedModel:
    lines = enumerate(stream, 1)
    lineno, header = _expect(lines, "header")
    fields = header.split("\t")
    if len(fields) != 4 or fields[0] != MAGIC or fields[1] != VERSION:
        raise DataError(f"not a {MAGIC} {VERSION} model file", line=lineno)
    try:
        node_count, rank = int(fields[2]), int(fields[3])
    except ValueError:
        raise DataError("bad model header sizes", line=lineno) from None
    if node_count < 1 or rank < 1:
        raise DataError("model header sizes must be positive", line=lineno)

    A = _read_rows(lines, node_count, rank)
    if np.any(A < 0):
        raise DataError("model holds negative output factors")

    lineno, marker = _expect(lines, "#LABELS")
    if marker != "#LABELS":
        raise DataError("missing #LABELS section", line=lineno)
    labels: list[str] = []
    for i in range(node_count):
        lineno, line = _expect(lines, "label")
        index, _, label = line.partition("\t")
        if index != str(i) or not label:
            raise DataError(f"expected label for node {i}", line=lineno)
        labels.append(label)

    state = FactorState(X=A.copy(), A=A, W=np.zeros_like(A))
    has_checkpoint = False
    for lineno, line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        tag, _, sweeps = line.partition("\t")
        if tag != "#CHECKPOINT":
            raise DataError(f"unexpected line {line[:40]!r}", line=lineno)
        try:
            state.sweeps = int(sweeps or 0)
        except ValueError:
            raise DataError(f"bad sweep count {sweeps!r}", line=lineno) from None
        state.X = _read_rows(lines, node_count, rank)
        state.W = _read_rows(lines, node_count, rank)
        has_checkpoint = True
        break
    return SavedModel(state=state, labels=tuple(labels), has_checkpoint=has_checkpoint)
