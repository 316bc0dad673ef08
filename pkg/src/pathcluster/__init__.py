"""Power-weighted shortest-path metrics and longest-leg path distance for
clustering Euclidean point clouds.

The distance between two points is the minimum over all point-to-point paths
of the p-norm of the Euclidean leg lengths (p = inf scores a path by its
longest single leg). A pruned Dijkstra search finds path k-nearest neighbors
in O(k^2) heap work per source, which feeds locally scaled similarity graphs
and normalized spectral clustering.
"""

from .dataset import (Dataset, SyntheticSpec, generate, load_csv, save_csv,
                      write_descriptor)
from .euclidean import NeighborList, SpatialIndex, build_index, knn_brute
from .evaluate import (TrialReport, accuracy, cluster_pipeline,
                       run_p_sweep, run_scaling_benchmark,
                       run_separation_experiment, run_table_experiment)
from .metrics import (INFINITY, ORACLE_CAP, check_power, intra_inter_stats,
                      pairwise_exact, path_length, save_distance_matrix)
from .pathknn import PathNeighborResult, SearchStats, path_knn, path_knn_all
from .similarity import (SparseSimilarity, build_full_similarity,
                         build_knn_similarity, build_unweighted_knn,
                         kernel_weight)
from .spectral import (ClusteringResult, EigenSolverError, KMeansResult,
                       SpectralConfig, kmeans, kmeans_fit,
                       normalized_operator, spectral_cluster,
                       top_eigenvectors)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "SyntheticSpec", "generate", "load_csv", "save_csv",
    "write_descriptor",
    "NeighborList", "SpatialIndex", "build_index", "knn_brute",
    "INFINITY", "ORACLE_CAP", "check_power", "path_length", "pairwise_exact",
    "intra_inter_stats", "save_distance_matrix",
    "PathNeighborResult", "SearchStats", "path_knn", "path_knn_all",
    "SparseSimilarity", "build_knn_similarity", "build_full_similarity",
    "build_unweighted_knn", "kernel_weight",
    "SpectralConfig", "ClusteringResult", "EigenSolverError", "KMeansResult",
    "spectral_cluster", "kmeans", "kmeans_fit", "normalized_operator",
    "top_eigenvectors",
    "accuracy", "TrialReport", "cluster_pipeline", "run_table_experiment",
    "run_p_sweep", "run_separation_experiment", "run_scaling_benchmark",
    "__version__",
]
