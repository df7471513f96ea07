"""scikit-learn style front ends for Panther and Panther++."""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    check_graph,
    check_open_unit,
    check_positive_int,
    check_seed,
    check_vertices,
)
from .sampling import (
    PathIndex,
    SamplingBudget,
    default_budget,
    generate_paths,
    required_sample_size,
)
from .similarity import TopKResult, similarity, top_k
from .vectors import VectorIndex, build_vector_matrix, cross_network_top_k, top_k_pp


class Panther(BaseEstimator):
    """Top-k vertex similarity from random path co-occurrence.

    Parameters
    ----------
    T : int, default=5
        Steps per random path.
    epsilon : float or None, default=None
        Error bound.  ``None`` uses ``sqrt(1 / |E|)`` of the fitted graph.
    delta : float, default=0.1
        Failure probability of the error bound.
    c : float, default=0.5
        Constant of the sample-size bound.
    n_paths : int or None, default=None
        Number of paths; overrides the bound when given.
    random_state : int or None, default=0
    n_jobs : int or None, default=None
        Worker threads for path generation (``None``: all cores).

    Attributes
    ----------
    graph_ : WeightedGraph
    budget_ : SamplingBudget
    n_paths_ : int
    paths_ : PathIndex
    """

    def __init__(self, T=5, epsilon=None, delta=0.1, c=0.5, n_paths=None,
                 random_state=0, n_jobs=None):
        self.T = T
        self.epsilon = epsilon
        self.delta = delta
        self.c = c
        self.n_paths = n_paths
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _resolve_budget(self, graph):
        T = check_positive_int(self.T, "T")
        delta = check_open_unit(self.delta, "delta")
        if self.epsilon is None:
            return default_budget(graph.edge_count, delta=delta, c=self.c, T=T)
        return SamplingBudget(epsilon=check_open_unit(self.epsilon, "epsilon"),
                              delta=delta, c=self.c, T=T)

    def fit(self, X, y=None):
        """Sample the paths for graph ``X``; ``y`` is ignored."""
        graph = check_graph(X)
        if graph.vertex_count == 0:
            raise ValueError("cannot fit on a graph without vertices")
        if self.n_paths is not None:
            # explicit sample size; T = 1 is allowed here
            R = check_positive_int(self.n_paths, "n_paths")
            budget = None
        else:
            budget = self._resolve_budget(graph)
            R = required_sample_size(budget)
        seed = check_seed(self.random_state)
        self.graph_ = graph
        self.budget_ = budget
        self.n_paths_ = R
        self.paths_ = generate_paths(graph, R, check_positive_int(self.T, "T"),
                                     seed=seed, n_jobs=self.n_jobs)
        return self

    def _set_paths(self, graph, paths: PathIndex):
        if paths.vertex_count != graph.vertex_count:
            raise ValueError(
                f"path index covers {paths.vertex_count} vertices, graph has "
                f"{graph.vertex_count}")
        if tuple(paths.labels) != tuple(graph.labels):
            raise ValueError("path index labels do not match the graph")
        self.graph_ = graph
        self.budget_ = None
        self.n_paths_ = paths.sample_size
        self.paths_ = paths
        return self

    @classmethod
    def from_paths(cls, graph, paths: PathIndex, **params):
        """Wrap an existing path index (for example one loaded from disk)."""
        est = cls(T=paths.path_length, n_paths=paths.sample_size,
                  random_state=paths.seed, **params)
        return est._set_paths(check_graph(graph), paths)

    def similarity(self, u, v) -> float:
        check_is_fitted(self, "paths_")
        return similarity(self.paths_, int(u), int(v)).value

    def top_k(self, v, k=10) -> TopKResult:
        check_is_fitted(self, "paths_")
        (v,) = check_vertices(v, self.graph_.vertex_count)
        return top_k(self.paths_, int(v), check_positive_int(k, "k"))

    def top_k_batch(self, vertices=None, k=10) -> list:
        check_is_fitted(self, "paths_")
        if vertices is None:
            vertices = range(self.graph_.vertex_count)
        ids = check_vertices(list(vertices), self.graph_.vertex_count)
        return [self.top_k(v, k) for v in ids]


class PantherPlusPlus(TransformerMixin, Panther, auto_wrap_output_keys=None):
    """Structural similarity through top-D path-similarity vectors.

    ``fit_transform(graph)`` returns the ``(|V|, D)`` feature matrix;
    ``transform(vertices)`` selects rows of it.  Queries go through an
    exact kd-tree built at fit time.

    Parameters
    ----------
    D : int, default=50
        Feature vector length.
    leaf_size : int, default=16
        kd-tree bucket size.
    T, epsilon, delta, c, n_paths, random_state, n_jobs
        As for :class:`Panther`.
    """

    def __init__(self, D=50, T=5, epsilon=None, delta=0.1, c=0.5, n_paths=None,
                 random_state=0, n_jobs=None, leaf_size=16):
        super().__init__(T=T, epsilon=epsilon, delta=delta, c=c, n_paths=n_paths,
                         random_state=random_state, n_jobs=n_jobs)
        self.D = D
        self.leaf_size = leaf_size

    def fit(self, X, y=None):
        super().fit(X, y)
        self._build_index()
        return self

    def _build_index(self):
        D = check_positive_int(self.D, "D")
        self.vectors_ = build_vector_matrix(self.paths_, D)
        self.index_ = VectorIndex(self.vectors_, labels=self.graph_.labels,
                                  leaf_size=self.leaf_size)

    def _set_paths(self, graph, paths):
        super()._set_paths(graph, paths)
        self._build_index()
        return self

    def set_vectors(self, index: VectorIndex):
        """Replace the fitted vectors, e.g. with ones loaded from disk."""
        check_is_fitted(self, "paths_")
        if len(index) != self.graph_.vertex_count:
            raise ValueError("vector index size does not match the graph")
        self.vectors_ = index.vectors
        self.index_ = index
        return self

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).vectors_

    def transform(self, X=None):
        """Feature vectors of vertex ids ``X`` (all vertices when ``None``)."""
        check_is_fitted(self, "vectors_")
        if X is None:
            return self.vectors_.copy()
        return self.vectors_[check_vertices(X, self.graph_.vertex_count)]

    def top_k(self, v, k=10) -> TopKResult:
        check_is_fitted(self, "index_")
        (v,) = check_vertices(v, self.graph_.vertex_count)
        return top_k_pp(self.index_, self.index_.vector(int(v)),
                        check_positive_int(k, "k"))

    def cross_top_k(self, other: "PantherPlusPlus", v, k=10) -> TopKResult:
        """Vertices of ``other``'s graph most similar in role to ``v``."""
        check_is_fitted(self, "index_")
        check_is_fitted(other, "index_")
        (v,) = check_vertices(v, self.graph_.vertex_count)
        return cross_network_top_k(self.index_, other.index_, int(v),
                                   check_positive_int(k, "k"))
