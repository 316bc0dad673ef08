"""Similarity matrices for spectral clustering.

Sparse graphs are built from path k-NN results with a locally scaled Gaussian
kernel: each point's bandwidth is its distance to the r-th nearest other
point under the chosen metric, and the kernel is exp(-d^2 / (sigma_i sigma_j)).
Directed neighbor relations are symmetrized entrywise by max. A dense
locally scaled Euclidean matrix and an unweighted 0/1 k-NN graph round out
the variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .euclidean import SpatialIndex
from .metrics import check_power
from .pathknn import path_knn_all

DEFAULT_K = 15
DEFAULT_R = 10
DENSE_CAP = 20_000


def kernel_weight(d, sigma_i, sigma_j):
    """Locally scaled Gaussian weight exp(-d^2 / (sigma_i sigma_j))."""
    return np.exp(-(np.asarray(d) ** 2) / (sigma_i * sigma_j))


def _sigma_floor(diameter: float) -> float:
    eps = float(np.finfo(float).eps)
    return eps * diameter if diameter > 0 else eps


@dataclass
class SparseSimilarity:
    """Symmetric sparse similarity: unique upper-triangle (i < j) entries.

    Weights lie in (0, 1]; the diagonal is never stored. meta records how the
    matrix was built (metric power, k, r, variant).
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def nnz(self) -> int:
        """Stored entries counting both orientations."""
        return 2 * len(self.weights)

    def to_csr(self) -> sp.csr_matrix:
        """Materialize the full symmetric matrix."""
        data = np.concatenate([self.weights, self.weights])
        i = np.concatenate([self.rows, self.cols])
        j = np.concatenate([self.cols, self.rows])
        return sp.csr_matrix((data, (i, j)), shape=(self.n, self.n))

    def degrees(self) -> np.ndarray:
        """Number of incident stored edges per vertex."""
        deg = np.zeros(self.n, dtype=int)
        np.add.at(deg, self.rows, 1)
        np.add.at(deg, self.cols, 1)
        return deg

    def save_triplets(self, path) -> None:
        """Write 'i j weight' lines for inspection."""
        lines = [f"{i} {j} {w:.17g}"
                 for i, j, w in zip(self.rows, self.cols, self.weights)]
        Path(path).write_text("\n".join(lines) + "\n")


def _symmetrize_max(n, i_arr, j_arr, w_arr, meta) -> SparseSimilarity:
    """Combine directed entries into max-symmetrized upper-triangle storage."""
    lo = np.minimum(i_arr, j_arr)
    hi = np.maximum(i_arr, j_arr)
    keep = (lo != hi) & (w_arr > 0)
    lo, hi, w = lo[keep], hi[keep], w_arr[keep]
    key = lo.astype(np.int64) * n + hi
    uniq, inverse = np.unique(key, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.maximum.at(merged, inverse, w)
    return SparseSimilarity(n=n, rows=(uniq // n).astype(np.int64),
                            cols=(uniq % n).astype(np.int64),
                            weights=merged, meta=meta)


def _validate_kr(n: int, k: int, r=None) -> None:
    if not 1 <= k < n:
        raise ValueError(f"k={k} invalid: need 1 <= k < n with n={n}")
    if r is not None and not 1 <= r <= k:
        raise ValueError(f"r={r} invalid: need 1 <= r <= k")


def build_knn_similarity(index: SpatialIndex, k: int = DEFAULT_K,
                         r: int = DEFAULT_R, p=2.0) -> SparseSimilarity:
    """Weighted path k-NN similarity matrix.

    Each point contributes kernel entries to its k path-nearest other points;
    sigma_i is its path distance to the r-th nearest other, taken from the
    same search (hence r <= k). Coincident points can give sigma_i = 0, which
    is floored at machine epsilon times the data diameter so exact duplicates
    keep weight 1 instead of dividing by zero.
    """
    p = check_power(p)
    n = index.n
    _validate_kr(n, k, r)
    # Searches count the source itself, so k others means k + 1 settled.
    results = path_knn_all(index, k + 1, p, refine_ties=False)
    floor = _sigma_floor(index.diameter_bound())
    sigma = np.array([max(res.distances[r], floor) for res in results])

    i_list, j_list, w_list = [], [], []
    for i, res in enumerate(results):
        nbr = res.indices[1:]
        d = res.distances[1:]
        i_list.append(np.full(len(nbr), i, dtype=np.int64))
        j_list.append(nbr)
        w_list.append(kernel_weight(d, sigma[i], sigma[nbr]))
    meta = {"p": p, "k": k, "r": r, "variant": "knn"}
    return _symmetrize_max(n, np.concatenate(i_list), np.concatenate(j_list),
                           np.concatenate(w_list), meta)


def build_unweighted_knn(index: SpatialIndex, k: int = DEFAULT_K,
                         p=2.0) -> SparseSimilarity:
    """0/1 path k-NN graph: an edge wherever either endpoint lists the other."""
    p = check_power(p)
    n = index.n
    _validate_kr(n, k)
    results = path_knn_all(index, k + 1, p, refine_ties=False)
    i_list, j_list = [], []
    for i, res in enumerate(results):
        nbr = res.indices[1:]
        i_list.append(np.full(len(nbr), i, dtype=np.int64))
        j_list.append(nbr)
    i_arr = np.concatenate(i_list)
    j_arr = np.concatenate(j_list)
    meta = {"p": p, "k": k, "r": None, "variant": "unweighted"}
    return _symmetrize_max(n, i_arr, j_arr, np.ones(len(i_arr)), meta)


def build_full_similarity(data, r: int = DEFAULT_R, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense locally scaled Euclidean similarity with zero diagonal.

    sigma_i is the Euclidean distance to the r-th nearest other point.
    Symmetric by construction; refused above cap points, where the dense
    matrix stops being a sensible object to hold in memory.
    """
    points = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    n = points.shape[0]
    if n > cap:
        raise ValueError(f"n={n} exceeds the dense similarity cap ({cap})")
    if not 1 <= r <= n - 1:
        raise ValueError(f"r={r} invalid: need 1 <= r <= n-1 with n={n}")
    euclid = cdist(points, points)
    # Row-sorted position r skips the self entry at distance zero.
    sigma = np.sort(euclid, axis=1)[:, r]
    span = points.max(axis=0) - points.min(axis=0)
    sigma = np.maximum(sigma, _sigma_floor(float(np.sqrt((span * span).sum()))))
    sim = np.exp(-(euclid ** 2) / np.outer(sigma, sigma))
    np.fill_diagonal(sim, 0.0)
    return sim
