import numpy as np
import pytest

from panther.graph import WeightedGraph, load_edge_list


def graph_from_text(text, weighted=False):
    return load_edge_list(text, weighted=weighted)


@pytest.fixture
def k3():
    return graph_from_text("a b\nb c\na c\n")


@pytest.fixture
def k4():
    return graph_from_text("a b\na c\na d\nb c\nb d\nc d\n")


@pytest.fixture
def path3():
    return graph_from_text("a b\nb c\n")


@pytest.fixture
def path5():
    return graph_from_text("a b\nb c\nc d\nd e\n")


@pytest.fixture
def barbell():
    # two triangles joined by the bridge c-d
    return graph_from_text("a b\nb c\na c\nc d\nd e\ne f\nd f\n")


@pytest.fixture
def star():
    return graph_from_text("".join(f"hub l{i}\n" for i in range(5)))


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < p
    return WeightedGraph.from_edges(iu[0][keep], iu[1][keep], n_vertices=n)


_CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Usage: ``criterion(3, passed, "detail")``.  Lines are printed in the
    terminal summary so they show up without ``-s``.
    """
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
