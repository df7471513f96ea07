from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from panther.graph import WeightedGraph, load_edge_list
from panther.oracle import (
    OracleTooLargeError,
    brute_knn,
    count_walks,
    exact_path_similarity,
    exact_path_table,
    jaccard,
)

from conftest import random_graph


def fraction_table(graph, T):
    """Rational-arithmetic enumeration over all vertex sequences."""
    n = graph.vertex_count
    adj = {v: dict(zip(graph.neighbors(v).tolist(),
                       [Fraction(w).limit_denominator(10 ** 9)
                        for w in graph.neighbor_weights(v).tolist()]))
           for v in range(n)}
    out = {}
    for seq in product(range(n), repeat=T + 1):
        prob = Fraction(1, n)
        for a, b in zip(seq, seq[1:]):
            if b not in adj[a]:
                prob = 0
                break
            prob *= adj[a][b] / sum(adj[a].values())
        if prob:
            members = set(seq)
            for u in members:
                for v in members:
                    out[u, v] = out.get((u, v), 0) + prob
    return out


def test_triangle_pairs_are_two_thirds(k3):
    for u, v in [(0, 1), (0, 2), (1, 2)]:
        assert exact_path_similarity(k3, 2, u, v) == pytest.approx(2 / 3, abs=1e-15)


def test_triangle_single_vertex_mass(k3):
    # twelve 2-paths; a-b-a and b-a-b miss c
    for v in range(3):
        assert exact_path_similarity(k3, 2, v, v) == pytest.approx(5 / 6, abs=1e-15)
    assert exact_path_table(k3, 2).path_count == 12


def test_disconnected_is_zero():
    g = load_edge_list("a b\nc d\n")
    assert exact_path_similarity(g, 3, 0, 2) == 0.0


def test_normalization(barbell):
    for T in (1, 2, 3, 4):
        assert abs(exact_path_table(barbell, T).total_mass - 1) < 1e-9


@pytest.mark.parametrize("text, weighted, T", [
    ("a b\nb c\nc d\n", False, 3),
    ("a b 1\nb c 3\na c 0.5\nc d 2\n", True, 2),
    ("a b\na c\na d\na e\n", False, 3),
    ("a a 2\na b 1\nb c 1\n", True, 3),
])
def test_matches_rational_enumeration(text, weighted, T):
    g = load_edge_list(text, weighted=weighted)
    table = exact_path_table(g, T).matrix
    ref = fraction_table(g, T)
    n = g.vertex_count
    for u in range(n):
        for v in range(n):
            assert table[u, v] == pytest.approx(float(ref.get((u, v), 0)), abs=1e-12)


def test_truncated_walks_at_isolated_vertex():
    g = WeightedGraph.from_edges([0], [1], labels=["a", "b", "z"], n_vertices=3)
    t = exact_path_table(g, 3)
    assert t.total_mass == pytest.approx(1.0)
    assert t[2, 2] == pytest.approx(1 / 3)
    assert t[0, 1] == pytest.approx(2 / 3)
    assert t.path_count == 3


def test_symmetric_and_bounded():
    g = random_graph(7, 0.5, seed=3)
    m = exact_path_table(g, 3).matrix
    assert np.allclose(m, m.T)
    assert np.all((m >= 0) & (m <= 1 + 1e-12))


def test_count_walks(k3, path3):
    assert count_walks(k3, 2) == 12
    assert count_walks(path3, 1) == 4


def test_budget_guard():
    g = random_graph(30, 0.5, seed=0)
    with pytest.raises(OracleTooLargeError):
        exact_path_table(g, 8)
    with pytest.raises(OracleTooLargeError):
        exact_path_table(g, 3, budget=100)


def test_jaccard_examples():
    g = load_edge_list("u b\nu c\nv b\nv c\n")
    assert jaccard(g, 0, 3) == 1.0
    h = load_edge_list("u b\nu c\nv a\nv c\n")
    assert jaccard(h, h.vertex_id("u"), h.vertex_id("v")) == pytest.approx(1 / 3)
    iso = WeightedGraph.from_edges([], [], n_vertices=2)
    assert jaccard(iso, 0, 1) == 0.0


def test_brute_knn_single_vector():
    res = brute_knn(np.array([[0.3, 0.1]]), np.array([0.0, 0.0]), 5)
    assert res.vertices == [0]


def test_brute_knn_ties_lower_id_first():
    vecs = np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    res = brute_knn(vecs, np.array([0.0, 0.0]), 4)
    assert res.vertices == [1, 3, 0, 2]
    assert res.scores[:2] == [float("inf")] * 2
    assert res.scores[2] == 1.0


def test_brute_knn_exclusion():
    vecs = np.eye(3)
    assert 1 not in brute_knn(vecs, vecs[1], 3, exclude=1).vertices
