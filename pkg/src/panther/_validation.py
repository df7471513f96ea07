"""Input checks shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .graph import WeightedGraph


def check_graph(X) -> WeightedGraph:
    """Coerce ``X`` to a :class:`WeightedGraph`.

    Accepts a WeightedGraph, a symmetric scipy sparse / dense adjacency
    matrix, or an integer edge array of shape ``(m, 2)`` or ``(m, 3)``
    (third column = weight).
    """
    if isinstance(X, WeightedGraph):
        return X
    if sp.issparse(X):
        A = sp.coo_matrix(X)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got {A.shape}")
        if (abs(A - A.T) > 1e-12).nnz:
            raise ValueError("adjacency matrix must be symmetric")
        keep = A.row <= A.col
        return WeightedGraph.from_edges(A.row[keep], A.col[keep], A.data[keep],
                                        n_vertices=A.shape[0])
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] in (2, 3) and arr.shape[0] != arr.shape[1]:
        w = arr[:, 2] if arr.shape[1] == 3 else None
        ends = arr[:, :2]
        if not np.all(np.equal(np.mod(ends, 1), 0)):
            raise ValueError("edge endpoints must be integers")
        return WeightedGraph.from_edges(ends[:, 0], ends[:, 1], w)
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return check_graph(sp.coo_matrix(arr))
    raise TypeError(
        f"cannot interpret {type(X).__name__} of shape {getattr(arr, 'shape', None)} as a graph")


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_open_unit(value, name):
    if not isinstance(value, numbers.Real) or not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_vertices(vertices, n_vertices):
    ids = np.atleast_1d(np.asarray(vertices))
    if ids.size and not np.issubdtype(ids.dtype, np.integer):
        raise TypeError("vertex ids must be integers")
    ids = ids.astype(np.int64)
    bad = (ids < 0) | (ids >= n_vertices)
    if np.any(bad):
        raise IndexError(f"vertex {ids[bad][0]} outside [0, {n_vertices})")
    return ids


def check_seed(random_state):
    """Return a non-negative integer seed; ``None`` draws one from OS entropy."""
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (2 ** 63))
    if isinstance(random_state, bool) or not isinstance(random_state, numbers.Integral) \
            or random_state < 0:
        raise ValueError(f"random_state must be a non-negative int or None, got {random_state!r}")
    return int(random_state)
