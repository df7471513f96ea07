"""Random path generation and the vertex-to-path inverted index."""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, sample_steps

__all__ = [
    "SamplingBudget",
    "PathIndex",
    "PathIndexFormatError",
    "required_sample_size",
    "default_budget",
    "generate_paths",
]

BLOCK_SIZE = 1 << 16
_MAGIC = b"PTHP"
_VERSION = 1
_HEADER = "<IQQqQ"


class PathIndexFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingBudget:
    """Error bound ``epsilon``, failure probability ``delta``, constant ``c``
    and path length ``T`` (number of steps)."""

    epsilon: float
    delta: float = 0.1
    c: float = 0.5
    T: int = 5

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if int(self.T) != self.T or self.T < 2:
            raise ValueError(f"T must be an integer >= 2, got {self.T}")


def required_sample_size(budget: SamplingBudget) -> int:
    """Number of paths that yields an epsilon-approximation w.p. 1 - delta.

    ``ceil(c / eps**2 * (log2(C(T, 2)) + 1 + ln(1 / delta)))``.  The
    vertex and edge counts of the graph do not enter.
    """
    T = int(budget.T)
    vc_bound = math.log2(math.comb(T, 2)) + 1
    r = budget.c / budget.epsilon ** 2 * (vc_bound + math.log(1 / budget.delta))
    return math.ceil(r)


def default_budget(edge_count, *, delta=0.1, c=0.5, T=5):
    # eps = sqrt(1/|E|) leaves (0, 1) for |E| <= 1, so floor |E| at 2
    eps = math.sqrt(1.0 / max(int(edge_count), 2))
    return SamplingBudget(epsilon=eps, delta=delta, c=c, T=T)


@dataclass(frozen=True, eq=False)
class PathIndex:
    """``R`` sampled paths of ``T`` steps and the per-vertex posting lists.

    ``paths`` is an ``(R, T + 1)`` int32 array; a walk that reaches a vertex
    without neighbors is truncated and padded with ``-1``.  The posting list
    of ``v`` is ``inverted_ids[inverted_indptr[v]:inverted_indptr[v + 1]]``,
    ascending path ids, each id at most once.
    """

    paths: np.ndarray
    inverted_indptr: np.ndarray
    inverted_ids: np.ndarray
    sample_size: int
    path_length: int
    seed: int
    vertex_count: int
    labels: tuple = ()

    def postings(self, v):
        return self.inverted_ids[self.inverted_indptr[v]:self.inverted_indptr[v + 1]]

    def path(self, r):
        p = self.paths[r]
        return p[p >= 0]

    @property
    def lengths(self):
        return (self.paths >= 0).sum(axis=1)

    def posting_sizes(self):
        return np.diff(self.inverted_indptr)

    # -- serialization -------------------------------------------------------

    def to_bytes(self):
        """Versioned little-endian layout.

        ``b"PTHP"``, then header ``u32 version, u64 R, u64 T, i64 seed,
        u64 |V|``; the path array (R x (T+1) i32, ``-1`` padded); the
        inverted offsets ((|V|+1) x i64); the posting entries (i32); u64
        label-block length and the ``\\n``-joined UTF-8 labels.
        """
        blob = "\n".join(self.labels).encode("utf-8")
        return b"".join([
            _MAGIC,
            struct.pack(_HEADER, _VERSION, self.sample_size, self.path_length,
                        self.seed, self.vertex_count),
            self.paths.astype("<i4").tobytes(),
            self.inverted_indptr.astype("<i8").tobytes(),
            self.inverted_ids.astype("<i4").tobytes(),
            struct.pack("<Q", len(blob)),
            blob,
        ])

    @classmethod
    def from_bytes(cls, data):
        if data[:4] != _MAGIC:
            raise PathIndexFormatError("not a path index file (bad magic)")
        version, R, T, seed, n = struct.unpack_from(_HEADER, data, 4)
        if version != _VERSION:
            raise PathIndexFormatError(f"unsupported path index version {version}")
        off = 4 + struct.calcsize(_HEADER)
        paths = np.frombuffer(data, "<i4", R * (T + 1), off).reshape(R, T + 1)
        off += 4 * R * (T + 1)
        indptr = np.frombuffer(data, "<i8", n + 1, off)
        off += 8 * (n + 1)
        nnz = int(indptr[-1])
        ids = np.frombuffer(data, "<i4", nnz, off)
        off += 4 * nnz
        (blob_len,) = struct.unpack_from("<Q", data, off)
        off += 8
        blob = bytes(data[off:off + blob_len]).decode("utf-8")
        return cls(
            paths=paths.astype(np.int32),
            inverted_indptr=indptr.astype(np.int64),
            inverted_ids=ids.astype(np.int32),
            sample_size=int(R), path_length=int(T), seed=int(seed),
            vertex_count=int(n), labels=tuple(blob.split("\n")) if n else (),
        )

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def __repr__(self):
        return (f"PathIndex(R={self.sample_size}, T={self.path_length}, "
                f"seed={self.seed}, vertex_count={self.vertex_count})")


def _walk_block(graph, seed, block, count, T):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    out = np.empty((count, T + 1), dtype=np.int32)
    cur = rng.integers(0, graph.vertex_count, size=count, dtype=np.int64)
    out[:, 0] = cur
    for t in range(1, T + 1):
        cur = sample_steps(graph, cur, rng)
        out[:, t] = cur
    return out


def build_inverted_index(paths, vertex_count):
    """Transpose paths into deduplicated, ascending per-vertex posting lists."""
    srt = np.sort(paths, axis=1)
    keep = srt >= 0
    keep[:, 1:] &= srt[:, 1:] != srt[:, :-1]
    rows, cols = np.nonzero(keep)
    verts = srt[rows, cols]
    order = np.argsort(verts, kind="stable")
    ids = rows[order].astype(np.int32)
    indptr = np.zeros(vertex_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(verts, minlength=vertex_count), out=indptr[1:])
    return indptr, ids


def generate_paths(graph: WeightedGraph, R: int, T: int, seed: int = 0,
                   n_jobs=None) -> PathIndex:
    """Sample ``R`` random walks of ``T`` steps from uniform start vertices.

    Path ids are split into fixed blocks of ``BLOCK_SIZE``; block ``b``
    draws from its own generator seeded by ``(seed, b)``, so the output
    depends on ``seed`` alone, never on ``n_jobs``.
    """
    if int(R) != R or R < 1:
        raise ValueError(f"R must be a positive integer, got {R}")
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    if R >= 2 ** 31 - 1:
        raise ValueError("R exceeds the 32-bit path id range")
    if graph.vertex_count < 1:
        raise ValueError("cannot sample paths on an empty graph")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    R, T, seed = int(R), int(T), int(seed)

    blocks = [(b, min(BLOCK_SIZE, R - b * BLOCK_SIZE))
              for b in range(-(-R // BLOCK_SIZE))]
    if n_jobs is None or n_jobs == -1:
        n_jobs = os.cpu_count() or 1
    if n_jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(
                lambda bc: _walk_block(graph, seed, bc[0], bc[1], T), blocks))
    else:
        parts = [_walk_block(graph, seed, b, c, T) for b, c in blocks]
    paths = np.concatenate(parts) if len(parts) > 1 else parts[0]
    indptr, ids = build_inverted_index(paths, graph.vertex_count)
    return PathIndex(
        paths=paths, inverted_indptr=indptr, inverted_ids=ids,
        sample_size=R, path_length=T, seed=seed,
        vertex_count=graph.vertex_count, labels=tuple(graph.labels),
    )

