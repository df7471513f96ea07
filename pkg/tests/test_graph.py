import io
import random

import numpy as np
import pytest
from scipy import stats

from panther.graph import (
    NO_NEIGHBOR,
    GraphFormatError,
    WeightedGraph,
    canonical_edges,
    load_edge_list,
    sample_steps,
    transition_sample,
    write_edge_list,
)

from conftest import random_graph


def test_unweighted_defaults_to_unit_weights():
    g = load_edge_list("a b\nb c\n")
    assert g.vertex_count == 3
    assert g.edge_count == 2
    assert np.all(g.weights == 1.0)


def test_duplicate_lines_sum_weights():
    g = load_edge_list("a b 1\na b 2\n", weighted=True)
    assert g.edge_count == 1
    assert list(g.edges()) == [(0, 1, 3.0)]


def test_reversed_duplicate_is_the_same_edge():
    g = load_edge_list("a b 1\nb a 2\n", weighted=True)
    assert list(g.edges()) == [(0, 1, 3.0)]


def test_empty_stream():
    g = load_edge_list(b"")
    assert g.vertex_count == 0 and g.edge_count == 0


def test_comments_and_blank_lines_are_skipped():
    g = load_edge_list("# header\n\na b\n  # indented comment\n")
    assert g.edge_count == 1


def test_byte_stream_input():
    g = load_edge_list(io.BytesIO(b"x y 2.5\n"), weighted=True)
    assert g.labels == ("x", "y")
    assert g.weighted_degree.tolist() == [2.5, 2.5]


@pytest.mark.parametrize("text, weighted, lineno", [
    ("a b\na\n", False, 2),
    ("a b c\n", False, 1),
    ("a b 1\na c x\n", True, 2),
    ("a b 0\n", True, 1),
    ("# c\na b -1\n", True, 2),
    ("a b\n", True, 1),
])
def test_ingestion_errors_carry_line_number(text, weighted, lineno):
    with pytest.raises(GraphFormatError) as info:
        load_edge_list(text, weighted=weighted)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


def test_self_loop_kept_once_in_row():
    g = load_edge_list("a a 2\na b 1\n", weighted=True)
    assert g.neighbors(0).tolist() == [0, 1]
    assert g.neighbor_weights(0).tolist() == [2.0, 1.0]
    assert g.edge_count == 2


def test_symmetry_and_cumulative_invariants():
    g = random_graph(40, 0.2, seed=3)
    rows = np.repeat(np.arange(g.vertex_count), g.degrees)
    forward = set(zip(rows.tolist(), g.indices.tolist(), g.weights.tolist()))
    assert forward == {(v, u, w) for u, v, w in forward}
    for v in range(g.vertex_count):
        lo, hi = g.indptr[v], g.indptr[v + 1]
        cum = g.cumulative[lo:hi]
        if hi > lo:
            assert np.all(np.diff(cum) > 0)
            assert cum[-1] == pytest.approx(g.weights[lo:hi].sum())


def test_transition_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    n = 30
    src, dst = rng.integers(0, n, 120), rng.integers(0, n, 120)
    g = WeightedGraph.from_edges(src, dst, rng.uniform(0.1, 5, 120), n_vertices=n)
    for v in range(n):
        _, p = g.transition_probabilities(v)
        if len(p):
            assert abs(p.sum() - 1) < 1e-12


def test_unweighted_transitions_are_uniform_exactly():
    g = load_edge_list("a b\na c\na d\n")
    _, p = g.transition_probabilities(0)
    assert p.tolist() == [1 / 3] * 3


def test_weighted_transition_probabilities():
    g = load_edge_list("a b 1\na c 3\n", weighted=True)
    nbrs, p = g.transition_probabilities(0)
    assert p.tolist() == [0.25, 0.75]


def test_transition_sample_uniform_chi_square():
    g = load_edge_list("a b\na c\na d\na e\n")
    rng = np.random.default_rng(11)
    draws = [transition_sample(g, 0, rng) for _ in range(100_000)]
    counts = np.bincount(draws, minlength=5)[1:]
    assert stats.chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("sampler", ["scalar", "vector"])
def test_empirical_frequencies_within_three_standard_errors(sampler):
    g = load_edge_list("a b 1\na c 3\na d 0.5\na a 2\n", weighted=True)
    nbrs, p = g.transition_probabilities(0)
    rng = np.random.default_rng(5)
    N = 100_000
    if sampler == "scalar":
        draws = np.array([transition_sample(g, 0, rng) for _ in range(N)])
    else:
        draws = sample_steps(g, np.zeros(N, dtype=np.int64), rng)
    for u, pu in zip(nbrs.tolist(), p.tolist()):
        freq = np.mean(draws == u)
        assert abs(freq - pu) <= 3 * np.sqrt(pu * (1 - pu) / N)


def test_isolated_vertex_has_no_neighbor():
    g = WeightedGraph.from_edges([], [], labels=["x"])
    assert transition_sample(g, 0, np.random.default_rng(0)) == NO_NEIGHBOR
    assert sample_steps(g, np.array([0, NO_NEIGHBOR]), np.random.default_rng(0)).tolist() == [-1, -1]


def test_out_of_range_vertex():
    g = load_edge_list("a b\n")
    with pytest.raises(IndexError):
        transition_sample(g, 2, np.random.default_rng(0))


def test_reserialization_is_idempotent():
    g = random_graph(25, 0.3, seed=1)
    buf = io.StringIO()
    write_edge_list(g, buf)
    g2 = load_edge_list(buf.getvalue(), weighted=True)
    assert canonical_edges(g2) == canonical_edges(g)
    buf2 = io.StringIO()
    write_edge_list(g2, buf2)
    g3 = load_edge_list(buf2.getvalue(), weighted=True)
    assert canonical_edges(g3) == canonical_edges(g2)


def test_shuffled_lines_give_isomorphic_graph():
    lines = [f"v{u} v{v} {w}\n" for u, v, w in random_graph(30, 0.2, seed=2).edges()]
    shuffled = lines[:]
    random.Random(0).shuffle(shuffled)
    a = load_edge_list("".join(lines), weighted=True)
    b = load_edge_list("".join(shuffled), weighted=True)
    assert a.labels != b.labels or lines == shuffled
    assert canonical_edges(a) == canonical_edges(b)


def test_snapshot_round_trip(tmp_path):
    g = load_edge_list("a b 1.5\nb c 2\nc c 1\n", weighted=True)
    path = tmp_path / "g.bin"
    g.save(path)
    h = WeightedGraph.load(path)
    assert h.labels == g.labels and h.edge_count == g.edge_count
    assert np.array_equal(h.indptr, g.indptr)
    assert np.array_equal(h.weights, g.weights)
    assert np.array_equal(h.cumulative, g.cumulative)
    assert path.read_bytes()[:4] == b"PTHG"


def test_snapshot_rejects_bad_magic():
    with pytest.raises(GraphFormatError):
        WeightedGraph.from_bytes(b"NOPE" + bytes(40))


def test_relabeled_preserves_structure():
    g = random_graph(15, 0.4, seed=4)
    perm = np.random.default_rng(0).permutation(15)
    h = g.relabeled(perm)
    assert canonical_edges(h) == canonical_edges(g)
    for v in range(15):
        assert sorted(perm[g.neighbors(v)].tolist()) == h.neighbors(perm[v]).tolist()
