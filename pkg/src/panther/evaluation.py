"""Accuracy protocols and synthetic graphs for desk-scale evaluation."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import clone

from .estimators import Panther, PantherPlusPlus
from .graph import WeightedGraph
from .oracle import jaccard
from .similarity import TopKResult, select_top_k

__all__ = [
    "EvalScore",
    "ResolutionReport",
    "common_neighbor_counts",
    "common_neighbor_score",
    "identity_resolution",
    "synth_graph",
    "default_seed_set",
    "panther_search",
    "jaccard_search",
    "random_search",
    "read_mapping",
    "write_mapping",
]

# searcher: (query vertex, k) -> ranked vertex ids
Search = Callable[[int, int], Sequence[int]]


@dataclass(frozen=True)
class EvalScore:
    """Improvement of an algorithm over uniform random selection.

    ``score = (f_alg - f_random) / (n_seeds * k)``.  ``random_std`` is the
    per-trial standard deviation of the random baseline expressed in score
    units; ``random_stderr`` is the standard error of its mean.
    """

    algorithm: str
    k: int
    f_alg: float
    f_random: float
    score: float
    random_std: float
    random_stderr: float
    n_seeds: int
    trials: int


@dataclass(frozen=True)
class ResolutionReport:
    ks: list
    hit_rates: list
    n_queries: int
    hits: list = field(default_factory=list)

    def hit_rate(self, k):
        return self.hit_rates[self.ks.index(k)]


def _as_ids(result):
    return result.vertices if isinstance(result, TopKResult) else list(result)


def _neighbor_sets(graph):
    return [set(graph.neighbors(v).tolist()) for v in range(graph.vertex_count)]


def common_neighbor_counts(graph: WeightedGraph, u: int, vertices: Iterable[int]):
    nu = set(graph.neighbors(u).tolist())
    return [len(nu.intersection(graph.neighbors(v).tolist())) for v in vertices]


def default_seed_set(graph, limit=1000, seed=0):
    """All vertices on small graphs, else a seeded uniform sample of ``limit``."""
    n = graph.vertex_count
    if n <= limit:
        return list(range(n))
    rng = np.random.default_rng(seed)
    return sorted(rng.choice(n, size=limit, replace=False).tolist())


def common_neighbor_score(graph: WeightedGraph, algorithm: Search, seeds=None, k=10,
                          trials=100, seed=0, name="algorithm") -> EvalScore:
    """Score top-k lists against common-neighbor counts.

    ``algorithm(u, k)`` returns the ranked vertex ids for seed ``u``.  The
    random baseline draws ``k`` distinct vertices other than ``u``, once
    per seed per trial, from a generator seeded with ``seed``.
    """
    n = graph.vertex_count
    if k < 1 or k >= n:
        raise ValueError(f"k must lie in [1, |V|) = [1, {n}), got {k}")
    if trials < 2:
        raise ValueError("at least two random trials are needed")
    seeds = default_seed_set(graph) if seeds is None else list(seeds)
    if not seeds:
        raise ValueError("seed set is empty")
    nbrs = _neighbor_sets(graph)

    f_alg = 0
    for u in seeds:
        top = _as_ids(algorithm(u, k))[:k]
        f_alg += sum(len(nbrs[u] & nbrs[v]) for v in top)

    rng = np.random.default_rng(seed)
    f_trials = np.zeros(trials)
    for t in range(trials):
        total = 0
        for u in seeds:
            pick = rng.choice(n - 1, size=k, replace=False)
            pick[pick >= u] += 1
            total += sum(len(nbrs[u] & nbrs[v]) for v in pick.tolist())
        f_trials[t] = total
    f_random = float(f_trials.mean())
    scale = len(seeds) * k
    std = float(f_trials.std(ddof=1)) / scale
    return EvalScore(
        algorithm=name, k=k, f_alg=float(f_alg), f_random=f_random,
        score=(f_alg - f_random) / scale, random_std=std,
        random_stderr=std / math.sqrt(trials), n_seeds=len(seeds), trials=trials,
    )


def panther_search(model: Panther) -> Search:
    return lambda u, k: model.top_k(u, k).vertices


def jaccard_search(graph: WeightedGraph) -> Search:
    """Rank every other vertex by Jaccard similarity (brute force)."""
    def search(u, k):
        others = [v for v in range(graph.vertex_count) if v != u]
        return [v for v, _ in select_top_k(others, [jaccard(graph, u, v) for v in others], k)]
    return search


def random_search(n_candidates, seed=0, exclude_self=True) -> Search:
    rng = np.random.default_rng(seed)

    def search(u, k):
        pool = n_candidates - 1 if exclude_self else n_candidates
        pick = rng.choice(pool, size=min(k, pool), replace=False)
        if exclude_self:
            pick[pick >= u] += 1
        return pick.tolist()
    return search


def identity_resolution(graph_a: WeightedGraph, graph_b: WeightedGraph, mapping: dict,
                        ks: Sequence[int], search: Search | None = None,
                        estimator: PantherPlusPlus | None = None) -> ResolutionReport:
    """Hit rate of finding each query's counterpart in B within the top k.

    ``mapping`` maps labels of A to labels of B; its keys are the query
    set.  Without ``search``, Panther++ models (clones of ``estimator``)
    are fitted on both graphs, each with its own budget.
    """
    if not mapping:
        raise ValueError("mapping is empty")
    ks = sorted({int(k) for k in ks})
    if not ks or ks[0] < 1:
        raise ValueError("ks must be positive integers")
    pairs = [(graph_a.vertex_id(a), graph_b.vertex_id(b)) for a, b in mapping.items()]
    if search is None:
        template = estimator if estimator is not None else PantherPlusPlus()
        model_a = clone(template).fit(graph_a)
        model_b = clone(template).fit(graph_b)
        search = lambda u, k: model_a.cross_top_k(model_b, u, k).vertices  # noqa: E731

    kmax = ks[-1]
    hits = [0] * len(ks)
    for qa, qb in pairs:
        ranked = list(search(qa, kmax))
        try:
            pos = ranked.index(qb)
        except ValueError:
            continue
        for i, k in enumerate(ks):
            if pos < k:
                hits[i] += 1
    n = len(pairs)
    return ResolutionReport(ks=ks, hit_rates=[h / n for h in hits], n_queries=n, hits=hits)


def read_mapping(stream) -> dict:
    """Parse ``labelA<TAB>labelB`` lines; ``#`` comments and blanks skipped."""
    out = {}
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'labelA<TAB>labelB'")
        out[parts[0]] = parts[1]
    return out


def write_mapping(mapping: dict, stream):
    for a, b in mapping.items():
        stream.write(f"{a}\t{b}\n")


# -- synthetic graphs ----------------------------------------------------------

def _erdos_renyi(n, p, rng):
    if n < 0 or not 0 <= p <= 1:
        raise ValueError("erdos-renyi needs n >= 0 and 0 <= p <= 1")
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if total else 0
    if m == total:
        iu = np.triu_indices(n, 1)
        return iu[0], iu[1]
    keys = np.empty(0, dtype=np.int64)
    while len(keys) < m:
        need = m - len(keys)
        a = rng.integers(0, n, size=2 * need + 16)
        b = rng.integers(0, n, size=2 * need + 16)
        ok = a != b
        lo, hi = np.minimum(a[ok], b[ok]), np.maximum(a[ok], b[ok])
        fresh = lo * n + hi
        # keep first occurrences so the draw order, not sorting, decides
        merged = np.concatenate([keys, fresh])
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)][:m]
    return keys // n, keys % n


def _preferential_attachment(n, m, seed):
    """Seed clique on ``m`` vertices, then each new vertex links to ``m``
    distinct earlier vertices with probability proportional to degree."""
    if m < 1 or n < m:
        raise ValueError("preferential-attachment needs m >= 1 and n >= m")
    rnd = random.Random(seed)
    src, dst = [], []
    ends = []  # each vertex listed once per incident edge end
    for i in range(m):
        for j in range(i + 1, m):
            src.append(i)
            dst.append(j)
            ends += (i, j)
    for v in range(m, n):
        targets = set()
        while len(targets) < m:
            if ends:
                targets.add(ends[int(rnd.random() * len(ends))])
            else:
                targets.add(int(rnd.random() * v))
        for t in sorted(targets):
            src.append(v)
            dst.append(t)
            ends += (v, t)
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def _perturbed_copy(graph, rho, rng):
    """Rewire ``round(rho * |E|)`` edges, then shuffle the internal vertex
    ids.  Labels follow their vertices, so the true mapping is the identity
    on labels."""
    n = graph.vertex_count
    edges = [(u, v) for u, v, _ in graph.edges()]
    m = len(edges)
    n_swap = int(round(rho * m))
    if n_swap:
        drop = set(rng.choice(m, size=n_swap, replace=False).tolist())
        kept = [e for i, e in enumerate(edges) if i not in drop]
        present = set(kept) | set(edges)
        added = []
        if n * (n - 1) // 2 - len(present) < n_swap:
            raise ValueError("graph too dense to rewire that many edges")
        while len(added) < n_swap:
            a, b = (int(x) for x in rng.integers(0, n, size=2))
            if a == b:
                continue
            e = (min(a, b), max(a, b))
            if e in present:
                continue
            present.add(e)
            added.append(e)
        edges = kept + added
    src = [u for u, _ in edges]
    dst = [v for _, v in edges]
    copy = WeightedGraph.from_edges(src, dst, labels=graph.labels, n_vertices=n)
    return copy.relabeled(rng.permutation(n))


def synth_graph(kind: str, seed: int = 0, **params):
    """Deterministic synthetic graphs.

    ``erdos-renyi`` (n, p) and ``preferential-attachment`` (n, m) return a
    WeightedGraph.  ``two-copies-perturbed`` (rho, base, plus the base
    kind's params) returns ``(graph_a, graph_b, mapping)``.
    """
    rng = np.random.default_rng(seed)
    if kind == "erdos-renyi":
        n = int(params.pop("n"))
        src, dst = _erdos_renyi(n, float(params.pop("p")), rng)
    elif kind == "preferential-attachment":
        n = int(params.pop("n"))
        src, dst = _preferential_attachment(n, int(params.pop("m")), seed)
    elif kind == "two-copies-perturbed":
        rho = float(params.pop("rho", 0.0))
        if not 0 <= rho <= 1:
            raise ValueError(f"rho must lie in [0, 1], got {rho}")
        base = params.pop("base", "preferential-attachment")
        if base == "two-copies-perturbed":
            raise ValueError("base graph kind cannot be two-copies-perturbed")
        graph_a = synth_graph(base, seed=seed, **params)
        graph_b = _perturbed_copy(graph_a, rho, np.random.default_rng([seed, 1]))
        return graph_a, graph_b, {lab: lab for lab in graph_a.labels}
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    if params:
        raise ValueError(f"unexpected parameters for {kind}: {sorted(params)}")
    return WeightedGraph.from_edges(src, dst, labels=[str(i) for i in range(n)],
                                    n_vertices=n)
