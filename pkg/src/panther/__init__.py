"""Top-k vertex similarity in large networks by random path sampling."""

from .estimators import Panther, PantherPlusPlus
from .graph import GraphFormatError, WeightedGraph, load_edge_list, transition_sample, write_edge_list
from .oracle import brute_knn, exact_path_similarity, exact_path_table, jaccard
from .sampling import PathIndex, SamplingBudget, default_budget, generate_paths, required_sample_size
from .similarity import TopKResult, similarity, top_k
from .vectors import (
    FeatureVector,
    KDTree,
    VectorIndex,
    build_vectors,
    cross_network_top_k,
    similarity_pp,
    top_k_pp,
)

__version__ = "0.1.0"

__all__ = [
    "Panther",
    "PantherPlusPlus",
    "WeightedGraph",
    "GraphFormatError",
    "load_edge_list",
    "write_edge_list",
    "transition_sample",
    "SamplingBudget",
    "PathIndex",
    "required_sample_size",
    "default_budget",
    "generate_paths",
    "TopKResult",
    "similarity",
    "top_k",
    "FeatureVector",
    "KDTree",
    "VectorIndex",
    "build_vectors",
    "similarity_pp",
    "top_k_pp",
    "cross_network_top_k",
    "exact_path_table",
    "exact_path_similarity",
    "jaccard",
    "brute_knn",
]
