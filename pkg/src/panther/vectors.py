"""Top-D similarity feature vectors and an exact kd-tree over them."""

from __future__ import annotations

import heapq
import math
import struct
from dataclasses import dataclass

import numpy as np

from .sampling import PathIndex
from .similarity import TopKResult

__all__ = [
    "FeatureVector",
    "KDTree",
    "VectorIndex",
    "VectorFileError",
    "build_vector_matrix",
    "build_vectors",
    "similarity_pp",
    "top_k_pp",
    "cross_network_top_k",
]

_MAGIC = b"PTHV"
_VERSION = 1


class VectorFileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureVector:
    vertex: int
    values: np.ndarray

    @property
    def dimension(self):
        return len(self.values)


def _dedup_rows(paths):
    rows = np.sort(paths, axis=1)
    dup = np.zeros(rows.shape, dtype=bool)
    dup[:, 1:] = rows[:, 1:] == rows[:, :-1]
    rows[dup] = -1
    return rows


def _pair_counts(paths, n, chunk):
    """Count, for every ordered pair ``(a, b)`` with ``a != b``, the paths
    containing both.  Returns sorted keys ``a * n + b`` and their counts."""
    keys_acc, counts_acc = [], []
    L = paths.shape[1]
    for start in range(0, len(paths), chunk):
        rows = _dedup_rows(paths[start:start + chunk]).astype(np.int64)
        keys = []
        for i in range(L):
            for j in range(L):
                if i == j:
                    continue
                a, b = rows[:, i], rows[:, j]
                ok = (a >= 0) & (b >= 0)
                keys.append(a[ok] * n + b[ok])
        if keys:
            k, c = np.unique(np.concatenate(keys), return_counts=True)
            keys_acc.append(k)
            counts_acc.append(c)
    if not keys_acc:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    if len(keys_acc) == 1:
        return keys_acc[0], counts_acc[0]
    keys = np.concatenate(keys_acc)
    counts = np.concatenate(counts_acc)
    order = np.argsort(keys, kind="stable")
    keys, counts = keys[order], counts[order]
    uniq, first = np.unique(keys, return_index=True)
    return uniq, np.add.reduceat(counts, first)


def build_vector_matrix(idx: PathIndex, D: int, chunk=1 << 17) -> np.ndarray:
    """Return the ``(|V|, D)`` matrix whose row ``v`` holds the ``D`` largest
    path similarities of ``v`` to other vertices, descending, zero padded."""
    if int(D) != D or D < 1:
        raise ValueError(f"D must be a positive integer, got {D}")
    D = int(D)
    n = idx.vertex_count
    out = np.zeros((n, D), dtype=np.float64)
    keys, counts = _pair_counts(idx.paths, n, chunk)
    if len(keys) == 0:
        return out
    src, dst = keys // n, keys % n
    order = np.lexsort((dst, -counts, src))
    src, counts = src[order], counts[order]
    group_start = np.searchsorted(src, src, side="left")
    rank = np.arange(len(src)) - group_start
    top = rank < D
    out[src[top], rank[top]] = counts[top] / idx.sample_size
    return out


def build_vectors(idx: PathIndex, D: int) -> list:
    return [FeatureVector(v, row) for v, row in enumerate(build_vector_matrix(idx, D))]


def _values(x):
    return np.asarray(x.values if isinstance(x, FeatureVector) else x, dtype=np.float64)


def similarity_pp(a, b) -> float:
    """Reciprocal Euclidean distance; ``math.inf`` for coincident vectors."""
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    dist = math.sqrt(float(((a - b) ** 2).sum()))
    return math.inf if dist == 0 else 1.0 / dist


def _score_from_sq(d2):
    return math.inf if d2 == 0 else 1.0 / math.sqrt(d2)


class KDTree:
    """Exact k-nearest-neighbor search under Euclidean distance.

    Level ``h`` splits on coordinate ``h % D`` at the median: points with a
    smaller coordinate go left, the rest go right.  A level whose coordinate
    is constant over the node is skipped.  Results are ordered by distance,
    ties by ascending point index.
    """

    def __init__(self, data, leaf_size=16):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("data must be a 2-D array")
        self.leaf_size = max(1, int(leaf_size))
        # node arrays: split dim (-1 for leaves), split value, children, leaf slice
        self._dim, self._val, self._left, self._right = [], [], [], []
        self._lo, self._hi = [], []
        self._order = np.arange(len(self.data))
        if len(self.data):
            self._build()

    def _new_node(self):
        for arr, fill in ((self._dim, -1), (self._val, 0.0), (self._left, -1),
                          (self._right, -1), (self._lo, 0), (self._hi, 0)):
            arr.append(fill)
        return len(self._dim) - 1

    def _build(self):
        n, D = self.data.shape
        root = self._new_node()
        stack = [(root, 0, n, 0)]
        while stack:
            node, lo, hi, depth = stack.pop()
            self._lo[node], self._hi[node] = lo, hi
            if hi - lo <= self.leaf_size or D == 0:
                continue
            ids = self._order[lo:hi]
            for shift in range(D):
                dim = (depth + shift) % D
                vals = self.data[ids, dim]
                perm = np.argsort(vals, kind="stable")
                vals = vals[perm]
                if vals[0] != vals[-1]:
                    break
            else:
                continue  # all points coincide
            mid = (hi - lo) // 2
            cut = int(np.searchsorted(vals, vals[mid], side="left"))
            if cut == 0:
                cut = int(np.searchsorted(vals, vals[mid], side="right"))
            self._order[lo:hi] = ids[perm]
            left, right = self._new_node(), self._new_node()
            self._dim[node], self._val[node] = dim, float(vals[cut])
            self._left[node], self._right[node] = left, right
            next_depth = depth + shift + 1
            stack.append((right, lo + cut, hi, next_depth))
            stack.append((left, lo, lo + cut, next_depth))

    def query(self, point, k, exclude=None):
        """Return up to ``k`` ``(index, squared_distance)`` pairs."""
        q = np.asarray(point, dtype=np.float64)
        if q.shape != (self.data.shape[1],):
            raise ValueError(
                f"query dimension {q.shape} does not match index dimension "
                f"{self.data.shape[1]}")
        if k < 1 or len(self.data) == 0:
            return []
        heap = []  # entries (-d2, -i): heap[0] is the current worst kept
        stack = [(0, 0.0)]
        while stack:
            node, bound = stack.pop()
            if len(heap) == k and bound > -heap[0][0]:
                continue
            dim = self._dim[node]
            if dim < 0:
                ids = self._order[self._lo[node]:self._hi[node]]
                diff = self.data[ids] - q
                d2s = (diff * diff).sum(axis=1)
                for i, d2 in zip(ids.tolist(), d2s.tolist()):
                    if i == exclude:
                        continue
                    item = (-d2, -i)
                    if len(heap) < k:
                        heapq.heappush(heap, item)
                    elif item > heap[0]:
                        heapq.heapreplace(heap, item)
                continue
            gap = q[dim] - self._val[node]
            if gap < 0:
                near, far = self._left[node], self._right[node]
            else:
                near, far = self._right[node], self._left[node]
            stack.append((far, max(bound, gap * gap)))
            stack.append((near, bound))
        heap.sort(reverse=True)
        return [(-neg_i, -neg_d2) for neg_d2, neg_i in heap]


class VectorIndex:
    """Feature vectors of one graph plus a kd-tree over them."""

    def __init__(self, vectors, labels=None, leaf_size=16):
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        n = len(self.vectors)
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        if len(self.labels) != n:
            raise ValueError("labels must have one entry per vector")
        self.tree = KDTree(self.vectors, leaf_size=leaf_size)

    @classmethod
    def from_paths(cls, idx: PathIndex, D: int, **kwargs):
        return cls(build_vector_matrix(idx, D), labels=idx.labels, **kwargs)

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.vectors)

    def vector(self, v):
        return FeatureVector(v, self.vectors[v])

    def query(self, values, k, exclude=None) -> list:
        """``(vertex, similarity)`` pairs of the ``k`` nearest vectors."""
        return [(i, _score_from_sq(d2))
                for i, d2 in self.tree.query(values, k, exclude=exclude)]

    def to_bytes(self):
        """``b"PTHV"``, u32 version, u64 n, u64 D, n x D f64 values, u64
        label-block length, ``\\n``-joined UTF-8 labels.  Little-endian."""
        blob = "\n".join(self.labels).encode("utf-8")
        n, D = self.vectors.shape
        return b"".join([
            _MAGIC, struct.pack("<IQQ", _VERSION, n, D),
            self.vectors.astype("<f8").tobytes(),
            struct.pack("<Q", len(blob)), blob,
        ])

    @classmethod
    def from_bytes(cls, data):
        if data[:4] != _MAGIC:
            raise VectorFileError("not a vector file (bad magic)")
        version, n, D = struct.unpack_from("<IQQ", data, 4)
        if version != _VERSION:
            raise VectorFileError(f"unsupported vector file version {version}")
        off = 4 + struct.calcsize("<IQQ")
        vecs = np.frombuffer(data, "<f8", n * D, off).reshape(n, D)
        off += 8 * n * D
        (blob_len,) = struct.unpack_from("<Q", data, off)
        off += 8
        blob = bytes(data[off:off + blob_len]).decode("utf-8")
        return cls(vecs.astype(np.float64), labels=blob.split("\n") if n else [])

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def top_k_pp(index: VectorIndex, query: FeatureVector, k: int,
             exclude_self=True) -> TopKResult:
    """Nearest vectors to ``query`` in ``index``, scored by similarity_pp.

    With ``exclude_self`` the query's own vertex is skipped; turn it off
    when ``query`` comes from a different graph.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    values = _values(query)
    if values.shape != (index.dimension,):
        raise ValueError(
            f"dimension mismatch: query {values.shape[0]} vs index {index.dimension}")
    exclude = query.vertex if exclude_self else None
    return TopKResult(query.vertex, index.query(values, int(k), exclude=exclude))


def cross_network_top_k(index_a: VectorIndex, index_b: VectorIndex, query: int,
                        k: int) -> TopKResult:
    """Vertices of graph B whose vectors lie nearest to ``query``'s vector in A."""
    if index_a.dimension != index_b.dimension:
        raise ValueError(
            f"dimension mismatch: {index_a.dimension} vs {index_b.dimension}")
    return top_k_pp(index_b, index_a.vector(query), k, exclude_self=False)
