"""Exact Euclidean k-nearest-neighbor queries over an immutable point set.

A k-d tree serves the fast path; a brute-force scan is kept alongside as the
reference implementation. Both resolve distance ties by ascending point index,
and both report distances recomputed with the same formula, so their outputs
are interchangeable bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .dataset import Dataset

LEAF_SIZE = 16


@dataclass
class NeighborList:
    """Neighbors of one point, ascending by (distance, index), source excluded."""

    source: int
    indices: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(d)) for i, d in zip(self.indices, self.distances)]


def _as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    pts = np.asarray(data, dtype=float)
    if pts.ndim != 2:
        raise ValueError("expected an n x D point array or a Dataset")
    return pts


def _distances_to(points: np.ndarray, source: int, idx: np.ndarray) -> np.ndarray:
    diff = points[idx] - points[source]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _check_query(n: int, source: int, k: int) -> None:
    if not 0 <= source < n:
        raise ValueError(f"source index {source} out of range for {n} points")
    if k < 0 or k >= n:
        raise ValueError(f"k={k} invalid: need 0 <= k <= n-1 with n={n}")


class SpatialIndex:
    """Immutable k-d tree over a point set; safe for concurrent read-only queries."""

    def __init__(self, data):
        self.points = _as_points(data)
        self.n, self.dim = self.points.shape
        self._tree = cKDTree(self.points, leafsize=LEAF_SIZE, balanced_tree=True)
        span = self.points.max(axis=0) - self.points.min(axis=0)
        # Bounding-box diagonal; upper bound on any pairwise distance.
        self._diameter_bound = float(np.sqrt((span * span).sum()))

    def diameter_bound(self) -> float:
        return self._diameter_bound

    def knn(self, source: int, k: int) -> NeighborList:
        """The k nearest other points, ascending by distance, ties by index.

        The fetch radius is widened until the k-th chosen distance lies
        strictly inside it, so boundary ties can never hide a lower-index
        point that was not fetched.
        """
        _check_query(self.n, source, k)
        if k == 0:
            return NeighborList(source, np.empty(0, dtype=int), np.empty(0))
        q = min(self.n, k + 1)
        while True:
            dist, idx = self._tree.query(self.points[source], k=q)
            dist = np.atleast_1d(dist)
            idx = np.atleast_1d(idx)
            keep = idx != source
            cand = idx[keep]
            if q == self.n:
                break
            if len(cand) >= k:
                d = dist[keep]
                order = np.lexsort((cand, d))
                if d[order[k - 1]] < dist.max():
                    break
            q = min(self.n, 2 * q)
        d = _distances_to(self.points, source, cand)
        order = np.lexsort((cand, d))[:k]
        return NeighborList(source, cand[order], d[order])

    def batch_knn(self, k: int, chunk: int = 2048) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor table for every point at once: (n, k) indices and distances.

        Row-identical to knn(). The vectorized path handles the generic case
        of strictly increasing distances; rows with ties anywhere near the
        cut, or whose own entry was crowded out by duplicates, fall back to
        the single-point query.
        """
        n = self.n
        if k < 0 or k >= n:
            raise ValueError(f"k={k} invalid: need 0 <= k <= n-1 with n={n}")
        out_idx = np.empty((n, k), dtype=np.int64)
        out_dist = np.empty((n, k))
        if k == 0:
            return out_idx, out_dist
        q = min(n, k + 2)
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            m = stop - start
            rows = np.arange(start, stop)
            dist, idx = self._tree.query(self.points[start:stop], k=q)
            dist = dist.reshape(m, q)
            idx = idx.reshape(m, q)

            local = np.arange(m)
            self_pos = np.argmax(idx == rows[:, None], axis=1)
            self_found = idx[local, self_pos] == rows

            mask = np.ones((m, q), dtype=bool)
            mask[local, self_pos] = False
            cand_idx = idx[mask].reshape(m, q - 1)
            diff = self.points[cand_idx] - self.points[rows][:, None, :]
            cand_d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

            order = np.argsort(cand_d, axis=1, kind="stable")
            cand_d = np.take_along_axis(cand_d, order, axis=1)
            cand_idx = np.take_along_axis(cand_idx, order, axis=1)

            probe = min(k + 1, q - 1)
            resolved = self_found & np.all(np.diff(cand_d[:, :probe], axis=1) > 0, axis=1)
            out_idx[start:stop] = cand_idx[:, :k]
            out_dist[start:stop] = cand_d[:, :k]
            for r in np.nonzero(~resolved)[0]:
                nl = self.knn(start + r, k)
                out_idx[start + r] = nl.indices
                out_dist[start + r] = nl.distances
        return out_idx, out_dist


def build_index(data) -> SpatialIndex:
    """Index a dataset for repeated k-NN queries; O(n log n) construction."""
    return SpatialIndex(data)


def knn_brute(data, source: int, k: int) -> NeighborList:
    """Reference k-NN by exhaustive scan; same contract as SpatialIndex.knn."""
    points = _as_points(data)
    n = points.shape[0]
    _check_query(n, source, k)
    d = _distances_to(points, source, np.arange(n))
    order = np.lexsort((np.arange(n), d))
    order = order[order != source][:k]
    return NeighborList(source, order, d[order])
