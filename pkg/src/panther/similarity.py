"""Path-similarity scores and top-k retrieval over a :class:`PathIndex`."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .sampling import PathIndex

__all__ = [
    "TopKResult",
    "SimilarityScore",
    "SelfQueryError",
    "similarity",
    "co_occurrence_counts",
    "top_k",
    "select_top_k",
]


class SelfQueryError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityScore:
    query: int
    target: int
    count: int
    sample_size: int

    @property
    def value(self):
        return self.count / self.sample_size


@dataclass(frozen=True)
class TopKResult:
    """Ranked ``(vertex, score)`` pairs for one query vertex."""

    query: int
    entries: list = field(default_factory=list)

    @property
    def vertices(self):
        return [v for v, _ in self.entries]

    @property
    def scores(self):
        return [s for _, s in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_tsv(self, query_label, labels, digits=6):
        return "".join(
            f"{query_label}\t{rank}\t{labels[v]}\t{s:.{digits}f}\n"
            for rank, (v, s) in enumerate(self.entries, start=1))


def _check_vertex(idx, v):
    if not 0 <= v < idx.vertex_count:
        raise IndexError(f"vertex {v} outside [0, {idx.vertex_count})")


def _merge_count(a, b):
    # two-pointer merge over ascending, duplicate-free posting lists
    i = j = hits = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            hits += 1
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return hits


def similarity(idx: PathIndex, u: int, v: int) -> SimilarityScore:
    """Fraction of sampled paths containing both ``u`` and ``v``."""
    _check_vertex(idx, u)
    _check_vertex(idx, v)
    if u == v:
        raise SelfQueryError("self-similarity is not part of the query contract")
    pu, pv = idx.postings(u), idx.postings(v)
    if len(pu) > 256 and len(pv) > 256:
        count = int(np.intersect1d(pu, pv, assume_unique=True).size)
    else:
        count = _merge_count(pu.tolist(), pv.tolist())
    return SimilarityScore(u, v, count, idx.sample_size)


def co_occurrence_counts(idx: PathIndex, v: int):
    """Return ``(vertices, counts)`` for every vertex sharing a path with ``v``.

    Each path in ``v``'s posting list adds one to every distinct vertex on
    it.  ``v`` itself is left out; vertices come back in ascending order.
    """
    _check_vertex(idx, v)
    rows = idx.paths[idx.postings(v)]
    if rows.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    rows = np.sort(rows, axis=1)
    keep = rows >= 0
    keep[:, 1:] &= rows[:, 1:] != rows[:, :-1]
    members = rows[keep]
    members = members[members != v]
    vertices, counts = np.unique(members, return_counts=True)
    return vertices.astype(np.int64), counts.astype(np.int64)


def select_top_k(vertices, scores, k):
    """Pick the ``k`` best ``(vertex, score)`` pairs with a bounded min-heap.

    Order is descending score, then ascending vertex id.
    """
    heap: list = []
    for v, s in zip(vertices, scores):
        item = (s, -v)
        if len(heap) < k:
            heapq.heappush(heap, item)
        elif item > heap[0]:
            heapq.heapreplace(heap, item)
    heap.sort(reverse=True)
    return [(-neg_v, s) for s, neg_v in heap]


def top_k(idx: PathIndex, v: int, k: int) -> TopKResult:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    k = int(k)
    vertices, counts = co_occurrence_counts(idx, v)
    if len(counts) > k:
        # drop candidates below the k-th largest count; ties at it survive
        kth = np.partition(counts, len(counts) - k)[len(counts) - k]
        keep = counts >= kth
        vertices, counts = vertices[keep], counts[keep]
    best = select_top_k(vertices.tolist(), counts.tolist(), k)
    R = idx.sample_size
    return TopKResult(v, [(u, c / R) for u, c in best])
