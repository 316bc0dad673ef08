"""Power-weighted path lengths and exact all-pairs shortest-path oracles.

For a finite power p >= 1 a path is scored as the p-norm of its Euclidean leg
lengths; the limiting case p = inf scores a path by its longest single leg.
The all-pairs oracles run dynamic programming over the complete graph and are
intended as ground truth at moderate n; the pruned search in pathknn is the
scalable route.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset

INFINITY = math.inf

ORACLE_CAP = 2000


def check_power(p) -> float:
    """Validate a path-power parameter: a finite real >= 1, or inf."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"power must be >= 1 or inf, got {p}")
    return p


def _points_of(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    return np.asarray(data, dtype=float)


def scale_bound(points: np.ndarray) -> float:
    """Bounding-box diagonal, used to rescale legs before powering so that
    large p cannot overflow; 1.0 for degenerate single-location data."""
    span = points.max(axis=0) - points.min(axis=0)
    s = float(np.sqrt((span * span).sum()))
    return s if s > 0 else 1.0


def path_length(data, path, p) -> float:
    """Length of an explicit path (point indices) under power p."""
    p = check_power(p)
    points = _points_of(data)
    path = np.asarray(path, dtype=int)
    if path.ndim != 1 or path.size < 2:
        raise ValueError("a path needs at least two points")
    diff = points[path[1:]] - points[path[:-1]]
    legs = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if math.isinf(p):
        return float(legs.max())
    top = float(legs.max())
    if top == 0.0:
        return 0.0
    return top * float(((legs / top) ** p).sum() ** (1.0 / p))


def _floyd_warshall(weights: np.ndarray) -> np.ndarray:
    """In-place min-plus closure of a dense weight matrix."""
    n = weights.shape[0]
    tmp = np.empty_like(weights)
    for k in range(n):
        np.add(weights[:, k, None], weights[None, k, :], out=tmp)
        np.minimum(weights, tmp, out=weights)
    return weights


def _minimax_closure(weights: np.ndarray) -> np.ndarray:
    """In-place closure under the bottleneck recurrence min(w, max(w_ik, w_kj))."""
    n = weights.shape[0]
    tmp = np.empty_like(weights)
    for k in range(n):
        np.maximum(weights[:, k, None], weights[None, k, :], out=tmp)
        np.minimum(weights, tmp, out=weights)
    return weights


def pairwise_exact(data, p, cap: int = ORACLE_CAP) -> np.ndarray:
    """Exact n x n matrix of power-weighted shortest-path distances.

    Finite p runs in the powered domain (legs rescaled by the bounding-box
    diagonal first) and takes the p-th root once at the end; p = inf uses the
    minimax recurrence directly on Euclidean distances. O(n^3); guarded by cap.
    """
    p = check_power(p)
    points = _points_of(data)
    n = points.shape[0]
    if n > cap:
        raise ValueError(
            f"n={n} exceeds the exact-oracle cap ({cap}); "
            "use path_knn for larger inputs")
    euclid = cdist(points, points)
    if math.isinf(p):
        return _minimax_closure(euclid)
    s = scale_bound(points)
    positive = euclid[euclid > 0]
    if positive.size and (positive.min() / s) ** p == 0.0:
        raise ValueError(
            f"power {p} exceeds the data's representable dynamic range: the "
            "smallest leg underflows after rescaling and powering, so exact "
            "results are impossible at this precision")
    weights = (euclid / s) ** p
    _floyd_warshall(weights)
    return s * weights ** (1.0 / p)


def intra_inter_stats(data: Dataset, p, cap: int = ORACLE_CAP
                      ) -> tuple[float, Optional[float]]:
    """(max intra-cluster, min inter-cluster) shortest-path distance.

    Both extremes are taken over paths through the full point set, so intra
    paths may detour through other clusters. With a single cluster the
    inter-cluster minimum does not exist and None is returned for it.
    """
    if data.labels is None:
        raise ValueError("intra_inter_stats needs a labeled dataset")
    dmat = pairwise_exact(data, p, cap=cap)
    labels = data.labels
    ell = data.num_clusters
    eps1 = 0.0
    for a in range(ell):
        members = np.nonzero(labels == a)[0]
        block = dmat[np.ix_(members, members)]
        eps1 = max(eps1, float(block.max()))
    if ell < 2:
        return eps1, None
    eps2 = math.inf
    for a in range(ell):
        for b in range(a + 1, ell):
            block = dmat[np.ix_(labels == a, labels == b)]
            eps2 = min(eps2, float(block.min()))
    return eps1, eps2


def save_distance_matrix(dmat: np.ndarray, path) -> None:
    """Dump a distance matrix as CSV for inspection."""
    np.savetxt(Path(path), dmat, fmt="%.17g", delimiter=",")
