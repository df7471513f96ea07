"""Undirected weighted graphs in compressed sparse row form.

Vertices carry arbitrary string labels externally and dense integer ids
``0..n-1`` internally.  Each vertex keeps the prefix sums of its incident
weights so that a weighted neighbor draw is a binary search.
"""

from __future__ import annotations

import io
import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "WeightedGraph",
    "load_edge_list",
    "write_edge_list",
    "transition_sample",
    "NO_NEIGHBOR",
]

NO_NEIGHBOR = -1

_SNAPSHOT_MAGIC = b"PTHG"
_SNAPSHOT_VERSION = 1


class GraphFormatError(ValueError):
    """Raised for malformed edge lists and snapshots."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected weighted graph.

    ``indptr``/``indices``/``weights`` are the CSR adjacency with neighbors
    sorted by id.  A self-loop appears once in its vertex's row.
    ``cumulative[indptr[v]:indptr[v + 1]]`` holds the running sum of the
    row weights, so its last entry is the weighted degree of ``v``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    labels: tuple = field(default=())
    edge_count: int = 0

    def __post_init__(self):
        n = len(self.indptr) - 1
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        if len(self.labels) != n:
            raise ValueError("labels must have one entry per vertex")
        # per-row prefix sums: global cumsum minus the row's starting offset
        glob = np.cumsum(self.weights)
        start = np.zeros(n, dtype=np.float64)
        nonempty = self.indptr[1:] > self.indptr[:-1]
        first = self.indptr[:-1][nonempty]
        start[nonempty] = glob[first] - self.weights[first]
        row = np.repeat(np.arange(n), np.diff(self.indptr))
        cumulative = glob - start[row]
        degree_weight = np.zeros(n, dtype=np.float64)
        if len(glob):
            last = self.indptr[1:][nonempty] - 1
            degree_weight[nonempty] = cumulative[last]
        for name, arr in (
            ("cumulative", cumulative),
            ("weighted_degree", degree_weight),
            ("_global_cumulative", glob),
            ("_row_start", start),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_label_ids", None)

    @classmethod
    def from_edges(cls, sources, targets, weights=None, labels=None, n_vertices=None):
        """Build a graph from parallel edge arrays.

        Duplicate undirected edges are merged by summing their weights.
        Non-positive weights raise ``ValueError``.
        """
        src = np.asarray(sources, dtype=np.int64).ravel()
        dst = np.asarray(targets, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("sources and targets differ in length")
        if weights is None:
            w = np.ones(len(src), dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).ravel()
            if w.shape != src.shape:
                raise ValueError("weights and edges differ in length")
        if np.any(~(w > 0)):
            raise ValueError("edge weights must be strictly positive")
        if n_vertices is None:
            n_vertices = len(labels) if labels is not None else (
                int(max(src.max(), dst.max())) + 1 if len(src) else 0)
        n = int(n_vertices)
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint outside [0, n_vertices)")

        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        key = lo * max(n, 1) + hi
        ukey, inverse = np.unique(key, return_inverse=True)
        uw = np.zeros(len(ukey), dtype=np.float64)
        np.add.at(uw, inverse, w)
        ulo, uhi = ukey // max(n, 1), ukey % max(n, 1)

        loop = ulo == uhi
        row = np.concatenate([ulo, uhi[~loop]])
        col = np.concatenate([uhi, ulo[~loop]])
        val = np.concatenate([uw, uw[~loop]])
        order = np.lexsort((col, row))
        row, col, val = row[order], col[order], val[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(row, minlength=n), out=indptr[1:])
        return cls(
            indptr=indptr,
            indices=col.astype(np.int64),
            weights=val,
            labels=tuple(labels) if labels is not None else (),
            edge_count=len(ukey),
        )

    @property
    def vertex_count(self):
        return len(self.indptr) - 1

    @property
    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi]

    def neighbor_weights(self, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.weights[lo:hi]

    def transition_probabilities(self, v):
        """Return ``(neighbors, probabilities)`` for one step out of ``v``."""
        w = self.neighbor_weights(v)
        if len(w) == 0:
            return self.neighbors(v), w
        return self.neighbors(v), w / self.weighted_degree[v]

    def edges(self):
        """Yield ``(u, v, w)`` once per undirected edge with ``u <= v``."""
        for u in range(self.vertex_count):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            for j in range(lo, hi):
                v = int(self.indices[j])
                if u <= v:
                    yield u, v, float(self.weights[j])

    def vertex_id(self, label):
        if self._label_ids is None:
            object.__setattr__(
                self, "_label_ids", {lab: i for i, lab in enumerate(self.labels)})
        try:
            return self._label_ids[label]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def relabeled(self, permutation):
        """Return the graph with vertex ``v`` renamed to ``permutation[v]``.

        Labels travel with their vertices.
        """
        perm = np.asarray(permutation, dtype=np.int64)
        n = self.vertex_count
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("permutation must be a bijection on vertex ids")
        rows = np.repeat(np.arange(n), self.degrees)
        keep = rows <= self.indices
        labels = [None] * n
        for v, lab in enumerate(self.labels):
            labels[perm[v]] = lab
        return WeightedGraph.from_edges(
            perm[rows[keep]], perm[self.indices[keep]], self.weights[keep],
            labels=labels, n_vertices=n)

    # -- binary snapshot ---------------------------------------------------

    def to_bytes(self):
        """Serialize to the versioned little-endian snapshot layout.

        Layout: ``b"PTHG"``, u32 version, u64 n, u64 nnz, u64 edge_count,
        then ``indptr`` (n+1 x i64), ``indices`` (nnz x i64), ``weights``
        (nnz x f64), u64 label-block length and the labels joined by ``\\n``
        as UTF-8.
        """
        label_blob = "\n".join(self.labels).encode("utf-8")
        parts = [
            _SNAPSHOT_MAGIC,
            struct.pack("<IQQQ", _SNAPSHOT_VERSION, self.vertex_count,
                        len(self.indices), self.edge_count),
            self.indptr.astype("<i8").tobytes(),
            self.indices.astype("<i8").tobytes(),
            self.weights.astype("<f8").tobytes(),
            struct.pack("<Q", len(label_blob)),
            label_blob,
        ]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data):
        if data[:4] != _SNAPSHOT_MAGIC:
            raise GraphFormatError("not a graph snapshot (bad magic)")
        version, n, nnz, m = struct.unpack_from("<IQQQ", data, 4)
        if version != _SNAPSHOT_VERSION:
            raise GraphFormatError(f"unsupported snapshot version {version}")
        off = 4 + struct.calcsize("<IQQQ")
        indptr = np.frombuffer(data, "<i8", n + 1, off).astype(np.int64)
        off += 8 * (n + 1)
        indices = np.frombuffer(data, "<i8", nnz, off).astype(np.int64)
        off += 8 * nnz
        weights = np.frombuffer(data, "<f8", nnz, off).astype(np.float64)
        off += 8 * nnz
        (blob_len,) = struct.unpack_from("<Q", data, off)
        off += 8
        blob = bytes(data[off:off + blob_len]).decode("utf-8")
        labels = tuple(blob.split("\n")) if n else ()
        return cls(indptr=indptr, indices=indices, weights=weights,
                   labels=labels, edge_count=int(m))

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def __repr__(self):
        return (f"WeightedGraph(vertex_count={self.vertex_count}, "
                f"edge_count={self.edge_count})")


def _iter_lines(source):
    if isinstance(source, (str, bytes)):
        data = source.encode() if isinstance(source, str) else source
        source = io.BytesIO(data)
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def load_edge_list(source: BinaryIO | Iterable | str | bytes, weighted=False) -> WeightedGraph:
    """Parse a whitespace-separated edge list.

    Each non-comment line is ``u v`` (or ``u v w`` when ``weighted``).
    Labels are mapped to dense ids in order of first appearance.  Blank
    lines and lines starting with ``#`` are skipped.

    Raises
    ------
    GraphFormatError
        On a wrong field count, a non-numeric weight, or a weight <= 0.
        The message carries the 1-based line number.
    """
    ids: dict[str, int] = {}
    src, dst, wts = [], [], []
    expected = 3 if weighted else 2
    for lineno, line in enumerate(_iter_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != expected:
            raise GraphFormatError(
                f"expected {expected} fields, got {len(fields)}", lineno)
        if weighted:
            try:
                w = float(fields[2])
            except ValueError:
                raise GraphFormatError(
                    f"non-numeric weight {fields[2]!r}", lineno) from None
            if not w > 0 or w == float("inf"):
                raise GraphFormatError(f"weight must be positive and finite, got {fields[2]}", lineno)
        else:
            w = 1.0
        for lab in fields[:2]:
            if lab not in ids:
                ids[lab] = len(ids)
        src.append(ids[fields[0]])
        dst.append(ids[fields[1]])
        wts.append(w)
    return WeightedGraph.from_edges(src, dst, wts, labels=list(ids), n_vertices=len(ids))


def write_edge_list(graph: WeightedGraph, stream, weighted=True):
    """Write each undirected edge once as ``label label [weight]``."""
    for u, v, w in graph.edges():
        if weighted:
            stream.write(f"{graph.labels[u]} {graph.labels[v]} {w!r}\n")
        else:
            stream.write(f"{graph.labels[u]} {graph.labels[v]}\n")


def transition_sample(graph: WeightedGraph, v: int, rng: np.random.Generator) -> int:
    """Draw one neighbor of ``v`` with probability proportional to edge weight.

    Returns ``NO_NEIGHBOR`` for an isolated vertex.
    """
    n = graph.vertex_count
    if not 0 <= v < n:
        raise IndexError(f"vertex {v} outside [0, {n})")
    lo, hi = int(graph.indptr[v]), int(graph.indptr[v + 1])
    if lo == hi:
        return NO_NEIGHBOR
    x = rng.random() * graph.weighted_degree[v]
    j = bisect_right(graph.cumulative, x, lo, hi)
    return int(graph.indices[min(j, hi - 1)])


def sample_steps(graph: WeightedGraph, current: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized single step for many walkers at once.

    ``current`` may contain ``NO_NEIGHBOR``; those walkers, and walkers
    sitting on isolated vertices, come back as ``NO_NEIGHBOR``.
    """
    out = np.full(current.shape, NO_NEIGHBOR, dtype=np.int64)
    live = current >= 0
    cur = current[live]
    deg = graph.indptr[cur + 1] - graph.indptr[cur]
    movable = deg > 0
    cur = cur[movable]
    lo = graph.indptr[cur]
    hi = graph.indptr[cur + 1]
    x = graph._row_start[cur] + rng.random(len(cur)) * graph.weighted_degree[cur]
    j = np.searchsorted(graph._global_cumulative, x, side="right")
    np.clip(j, lo, hi - 1, out=j)
    step = np.full(len(movable), NO_NEIGHBOR, dtype=np.int64)
    step[movable] = graph.indices[j]
    out[live] = step
    return out


def canonical_edges(graph: WeightedGraph) -> Sequence[tuple]:
    """Sorted ``(label_u, label_v, weight)`` triples with ``label_u <= label_v``."""
    out = []
    for u, v, w in graph.edges():
        a, b = graph.labels[u], graph.labels[v]
        if b < a:
            a, b = b, a
        out.append((a, b, w))
    return sorted(out)
