"""
Edge-list readers and writers for SHDI matrices.

Supported formats:
1. tsv  - `<label_a>\\t<label_b>\\t<weight>`, `#` comment lines skipped
2. mtx  - MatrixMarket coordinate format with the `symmetric` qualifier

Raw labels are remapped to dense 0-based indices. Labels are ordered
numerically when every label is a nonnegative integer, lexicographically
otherwise, so the mapping does not depend on line order.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Literal, TextIO

import numpy as np

from src.errors import DataError
from src.shdi.matrix import ShdiMatrix

logger = logging.getLogger(__name__)

EdgeFormat = Literal["tsv", "mtx"]

# Relative tolerance when the same pair is listed twice
DUPLICATE_RTOL = 1e-9


@dataclass
class RawEdges:
    """Edges of one input file, still keyed by raw labels."""
    pairs: dict[tuple[str, str], tuple[float, int]] = field(default_factory=dict)
    labels: set[str] = field(default_factory=set)
    declared_nodes: int | None = None

    def add(self, a: str, b: str, weight: float, line: int) -> None:
        key = (a, b) if _label_key(a) <= _label_key(b) else (b, a)
        previous = self.pairs.get(key)
        if previous is not None:
            old, old_line = previous
            scale = max(abs(old), abs(weight))
            if abs(old - weight) > DUPLICATE_RTOL * scale:
                raise DataError(
                    f"conflicting weights {old!r} (line {old_line}) and {weight!r} "
                    f"for pair {key[0]}-{key[1]}",
                    line=line,
                )
            return
        self.pairs[key] = (weight, line)
        self.labels.update(key)


def _label_key(label: str) -> tuple[int, int | str]:
    if label.isdigit():
        return (0, int(label))
    return (1, label)


def _ordered_labels(labels: Iterable[str]) -> list[str]:
    labels = list(labels)
    if all(label.isdigit() for label in labels):
        return sorted(labels, key=int)
    return sorted(labels)


def _parse_weight(token: str, line: int) -> float:
    try:
        weight = float(token)
    except ValueError:
        raise DataError(f"weight {token!r} is not a number", line=line) from None
    if not math.isfinite(weight):
        raise DataError(f"weight {token!r} is not finite", line=line)
    if weight < 0:
        raise DataError(f"negative weight {weight!r}", line=line)
    return weight


def read_tsv(stream: Iterable[str]) -> RawEdges:
    raw = RawEdges()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
        a, b = fields[0].strip(), fields[1].strip()
        if not a or not b:
            raise DataError("empty node label", line=lineno)
        raw.add(a, b, _parse_weight(fields[2].strip(), lineno), lineno)
    return raw


def read_matrix_market(stream: Iterable[str]) -> RawEdges:
    raw = RawEdges()
    lines = enumerate(stream, 1)

    try:
        lineno, header = next(lines)
    except StopIteration:
        raise DataError("empty MatrixMarket stream") from None
    tokens = header.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
        raise DataError("missing %%MatrixMarket header", line=lineno)
    _, obj, layout, value_field, symmetry = tokens
    if obj != "matrix" or layout != "coordinate":
        raise DataError(f"unsupported MatrixMarket layout {obj} {layout}", line=lineno)
    if symmetry != "symmetric":
        raise DataError(f"MatrixMarket matrix must be symmetric, got {symmetry!r}", line=lineno)
    if value_field not in ("real", "integer", "pattern"):
        raise DataError(f"unsupported MatrixMarket field {value_field!r}", line=lineno)

    size: tuple[int, int, int] | None = None
    seen = 0
    for lineno, line in lines:
        text = line.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if size is None:
            try:
                rows, cols, nnz = (int(p) for p in parts)
            except ValueError:
                raise DataError("bad MatrixMarket size line", line=lineno) from None
            if rows != cols or rows < 1:
                raise DataError(f"symmetric matrix must be square, got {rows}x{cols}", line=lineno)
            size = (rows, cols, nnz)
            continue
        expected = 2 if value_field == "pattern" else 3
        if len(parts) != expected:
            raise DataError(f"expected {expected} fields, got {len(parts)}", line=lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError("MatrixMarket indices must be integers", line=lineno) from None
        if not (1 <= i <= size[0] and 1 <= j <= size[0]):
            raise DataError(f"index ({i}, {j}) outside 1..{size[0]}", line=lineno)
        weight = 1.0 if value_field == "pattern" else _parse_weight(parts[2], lineno)
        raw.add(str(i), str(j), weight, lineno)
        seen += 1

    if size is None:
        raise DataError("MatrixMarket stream has no size line")
    if seen != size[2]:
        raise DataError(f"size line declares {size[2]} entries, found {seen}")
    raw.declared_nodes = size[0]
    return raw


def read_raw(stream: Iterable[str], format: EdgeFormat) -> RawEdges:
    if format == "tsv":
        return read_tsv(stream)
    if format == "mtx":
        return read_matrix_market(stream)
    raise DataError(f"unknown edge format {format!r}")


def _universe(raws: Sequence[RawEdges]) -> list[str]:
    declared = [r.declared_nodes for r in raws if r.declared_nodes is not None]
    if declared:
        # MatrixMarket inputs keep isolated nodes: the universe is 1..N
        count = max(declared)
        labels = {str(i) for i in range(1, count + 1)}
        for r in raws:
            labels |= r.labels
        return _ordered_labels(labels)
    labels_union: set[str] = set()
    for r in raws:
        labels_union |= r.labels
    return _ordered_labels(labels_union)


def build_matrix(raw: RawEdges, labels: Sequence[str]) -> ShdiMatrix:
    id_map = {label: i for i, label in enumerate(labels)}
    try:
        triples = [
            (id_map[a], id_map[b], weight) for (a, b), (weight, _) in raw.pairs.items()
        ]
    except KeyError as exc:
        raise DataError(f"unknown node label {exc.args[0]!r}") from None
    first = np.array([t[0] for t in triples], dtype=np.int64)
    second = np.array([t[1] for t in triples], dtype=np.int64)
    weights = np.array([t[2] for t in triples], dtype=np.float64)
    heads = np.minimum(first, second)
    tails = np.maximum(first, second)
    order = np.lexsort((tails, heads))
    return ShdiMatrix(len(labels), heads[order], tails[order], weights[order], tuple(labels))


def parse_edges(stream: Iterable[str], format: EdgeFormat = "tsv") -> ShdiMatrix:
    """Parse one edge stream into a validated ShdiMatrix."""
    raw = read_raw(stream, format)
    labels = _universe([raw])
    if not labels:
        raise DataError("no edges found")
    mat = build_matrix(raw, labels)
    logger.info("Parsed %d pairs over %d nodes (%s)", mat.edge_count, mat.node_count, format)
    return mat


def parse_edge_files(
    streams: Sequence[Iterable[str]],
    format: EdgeFormat = "tsv",
    labels: Sequence[str] | None = None,
) -> list[ShdiMatrix]:
    """
    Parse several streams into matrices sharing one node universe.

    With `labels` given (e.g. from a saved model) every label must already be
    known; otherwise the universe is the union of all labels seen.
    """
    raws = [read_raw(s, format) for s in streams]
    universe = list(labels) if labels is not None else _universe(raws)
    if not universe:
        raise DataError("no edges found")
    return [build_matrix(raw, universe) for raw in raws]


def serialize_edges(mat: ShdiMatrix, out: TextIO, format: EdgeFormat = "tsv") -> None:
    """
    Write canonical edges; weights use shortest round-trip formatting.

    The mtx writer emits dense 1-based indices, so raw labels survive only
    in the tsv format.
    """
    if format == "tsv":
        for m, n, y in zip(mat.heads, mat.tails, mat.weights, strict=True):
            out.write(f"{mat.labels[m]}\t{mat.labels[n]}\t{float(y)!r}\n")
    elif format == "mtx":
        out.write("%%MatrixMarket matrix coordinate real symmetric\n")
        out.write(f"{mat.node_count} {mat.node_count} {mat.edge_count}\n")
        # lower triangle, 1-based
        for m, n, y in zip(mat.heads, mat.tails, mat.weights, strict=True):
            out.write(f"{n + 1} {m + 1} {float(y)!r}\n")
    else:
        raise DataError(f"unknown edge format {format!r}")


def write_labels(labels: Sequence[str], out: TextIO) -> None:
    """One label per line, in index order."""
    out.writelines(f"{label}\n" for label in labels)


def read_labels(stream: Iterable[str]) -> list[str]:
    """Node universe written by `write_labels`; order is kept as the index order."""
    labels: list[str] = []
    seen: set[str] = set()
    for lineno, line in enumerate(stream, 1):
        label = line.rstrip("\n")
        if not label.strip() or label.startswith("#"):
            continue
        if "\t" in label:
            raise DataError("node labels may not contain tabs", line=lineno)
        if label in seen:
            raise DataError(f"duplicate node label {label!r}", line=lineno)
        seen.add(label)
        labels.append(label)
    if not labels:
        raise DataError("no node labels found")
    return labels
