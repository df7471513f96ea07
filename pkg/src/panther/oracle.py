"""Brute-force references for small graphs.

Nothing here touches the sampler: path similarity is obtained by walking
every T-step path with its exact probability, and nearest neighbors by a
full distance scan.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph
from .similarity import TopKResult

__all__ = [
    "OracleTooLargeError",
    "ExactPathTable",
    "exact_path_table",
    "exact_path_similarity",
    "count_walks",
    "jaccard",
    "brute_knn",
    "ENUMERATION_BUDGET",
]

ENUMERATION_BUDGET = 10 ** 7


class OracleTooLargeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactPathTable:
    """Exact probability that a random ``T``-path contains both vertices.

    ``matrix[u, v]`` for ``u != v`` is the pair similarity; the diagonal
    holds the probability of touching a single vertex.  ``total_mass`` is
    the summed probability of all enumerated paths and should be 1.
    """

    T: int
    matrix: np.ndarray
    total_mass: float
    path_count: int

    def __getitem__(self, pair):
        return float(self.matrix[pair])


def count_walks(graph: WeightedGraph, T: int) -> int:
    """Number of distinct T-step walks, a walk ending early at a dead end
    counting once."""
    n = graph.vertex_count
    ways = [1] * n  # walks of remaining length 0 from each vertex
    for _ in range(T):
        nxt = []
        for v in range(n):
            nbrs = graph.neighbors(v)
            nxt.append(sum(ways[u] for u in nbrs) if len(nbrs) else 1)
        ways = nxt
    return sum(ways)


def _check_budget(graph, T, budget):
    n = graph.vertex_count
    if n == 0:
        return 0
    mean_degree = len(graph.indices) / n
    if n * mean_degree ** T > budget:
        raise OracleTooLargeError(
            f"|V| * mean_degree^T = {n * mean_degree ** T:.3g} exceeds {budget}")
    walks = count_walks(graph, T)
    if walks > budget:
        raise OracleTooLargeError(f"{walks} walks exceed the budget of {budget}")
    return walks


def exact_path_table(graph: WeightedGraph, T: int, budget=ENUMERATION_BUDGET) -> ExactPathTable:
    """Enumerate every T-path depth first, carrying its probability.

    A start vertex is drawn with probability 1/|V|; each step follows the
    weight-proportional transition.  A walk that reaches a vertex with no
    neighbors stops there, exactly as the sampler does.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    walks = _check_budget(graph, T, budget)
    n = graph.vertex_count
    steps = []
    for v in range(n):
        nbrs, probs = graph.transition_probabilities(v)
        steps.append(list(zip(nbrs.tolist(), probs.tolist())))

    # probability mass per distinct vertex set
    mass_by_set: dict = defaultdict(float)
    total = 0.0
    for start in range(n):
        stack = [(start, 1.0 / n, 0, frozenset((start,)))]
        while stack:
            v, prob, depth, seen = stack.pop()
            if depth == T or not steps[v]:
                mass_by_set[seen] += prob
                total += prob
                continue
            for u, t in steps[v]:
                stack.append((u, prob * t, depth + 1, seen | {u}))

    matrix = np.zeros((n, n), dtype=np.float64)
    for members, mass in mass_by_set.items():
        for u in members:
            matrix[u, u] += mass
        for u, v in itertools.combinations(members, 2):
            matrix[u, v] += mass
            matrix[v, u] += mass
    return ExactPathTable(T=int(T), matrix=matrix, total_mass=total, path_count=walks)


def exact_path_similarity(graph: WeightedGraph, T: int, u: int, v: int,
                          budget=ENUMERATION_BUDGET) -> float:
    n = graph.vertex_count
    for x in (u, v):
        if not 0 <= x < n:
            raise IndexError(f"vertex {x} outside [0, {n})")
    return exact_path_table(graph, T, budget)[u, v]


def jaccard(graph: WeightedGraph, u: int, v: int) -> float:
    """Neighborhood overlap ``|N(u) & N(v)| / |N(u) | N(v)|``; 0 when both
    neighborhoods are empty."""
    a = set(graph.neighbors(u).tolist())
    b = set(graph.neighbors(v).tolist())
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def brute_knn(vectors, query, k, exclude=None) -> TopKResult:
    """Scan every vector; order by distance, then ascending index."""
    vectors = np.asarray(vectors, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    d2 = ((vectors - q) ** 2).sum(axis=1)
    ranked = sorted((float(d), i) for i, d in enumerate(d2) if i != exclude)[:k]
    entries = [(i, math.inf if d == 0 else 1.0 / math.sqrt(d)) for d, i in ranked]
    return TopKResult(-1 if exclude is None else exclude, entries)
