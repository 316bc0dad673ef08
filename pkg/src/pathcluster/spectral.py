"""Normalized spectral clustering over dense or sparse similarity matrices.

Pipeline: degree-normalize the similarity to D^{-1/2} A D^{-1/2}, embed each
point as its row in the matrix of the top num_clusters eigenvectors, normalize
rows to the unit sphere, then run seeded k-means++ on the embedding. Accuracy
against ground truth is always scored permutation-invariantly, so the usual
eigenvector sign and rotation ambiguities never touch reported numbers.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .similarity import SparseSimilarity

DENSE_SOLVER_MAX_N = 4000


class EigenSolverError(RuntimeError):
    """Iterative eigensolver failed to converge within its iteration budget."""


@dataclass(frozen=True)
class SpectralConfig:
    num_clusters: int
    eigsolver: str = "auto"  # auto | dense | iterative
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    seed: Optional[int] = None
    max_matvecs: int = 5000

    def __post_init__(self):
        if self.num_clusters < 2:
            raise ValueError("num_clusters must be at least 2")
        if self.eigsolver not in ("auto", "dense", "iterative"):
            raise ValueError(f"unknown eigsolver {self.eigsolver!r}")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be at least 1")


@dataclass
class ClusteringResult:
    labels: np.ndarray
    num_clusters: int
    accuracy: Optional[float]
    timings: dict
    config: dict
    eigenvalues: np.ndarray
    zero_embedding_rows: int = 0

    def to_json(self, include_labels: bool = True) -> str:
        record = {
            "num_clusters": self.num_clusters,
            "accuracy": self.accuracy,
            "timings": self.timings,
            "config": self.config,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "zero_embedding_rows": self.zero_embedding_rows,
        }
        if include_labels:
            record["labels"] = [int(v) for v in self.labels]
        return json.dumps(record, indent=2, sort_keys=True)


def _as_matrix(similarity):
    if isinstance(similarity, SparseSimilarity):
        return similarity.to_csr()
    if sp.issparse(similarity):
        return similarity.tocsr()
    mat = np.asarray(similarity, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("similarity must be a square matrix")
    return mat


def normalized_operator(similarity):
    """D^{-1/2} A D^{-1/2} with zero degrees floored at machine scale."""
    mat = _as_matrix(similarity)
    n = mat.shape[0]
    deg = np.asarray(mat.sum(axis=1)).reshape(n)
    floor = np.finfo(float).eps * max(float(deg.max()), 1.0)
    deg = np.maximum(deg, floor)
    inv_sqrt = 1.0 / np.sqrt(deg)
    if sp.issparse(mat):
        scaling = sp.diags(inv_sqrt)
        return (scaling @ mat @ scaling).tocsr()
    return mat * np.outer(inv_sqrt, inv_sqrt)


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    flip = np.sign(vectors[np.abs(vectors).argmax(axis=0), np.arange(vectors.shape[1])])
    flip[flip == 0] = 1.0
    return vectors * flip


def top_eigenvectors(operator, num: int, solver: str = "auto",
                     seed: Optional[int] = None, max_matvecs: int = 5000
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Largest-eigenvalue pairs of a symmetric operator, descending.

    solver='dense' runs a full symmetric decomposition; 'iterative' runs a
    restarted Lanczos iteration suited to large sparse inputs; 'auto' picks
    dense up to DENSE_SOLVER_MAX_N points and iterative beyond.
    """
    n = operator.shape[0]
    if not 1 <= num <= n:
        raise ValueError(f"need 1 <= num <= n, got num={num}, n={n}")
    if solver == "auto":
        solver = "dense" if (not sp.issparse(operator) or n <= DENSE_SOLVER_MAX_N) \
            else "iterative"
    if solver == "dense":
        dense = operator.toarray() if sp.issparse(operator) else np.asarray(operator)
        values, vectors = np.linalg.eigh(dense)
        values = values[::-1][:num]
        vectors = vectors[:, ::-1][:, :num]
    else:
        if num >= n:
            raise ValueError("iterative solver needs num < n")
        ncv = min(n, max(2 * num + 1, 20))
        maxiter = max(1, max_matvecs // ncv)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        try:
            values, vectors = eigsh(operator, k=num, which="LA", v0=v0,
                                    ncv=ncv, maxiter=maxiter, tol=1e-10)
        except ArpackNoConvergence as err:
            raise EigenSolverError(
                f"eigensolver did not converge within {maxiter} restart "
                f"iterations ({len(err.eigenvalues)}/{num} pairs converged)"
            ) from err
        order = np.argsort(values)[::-1]
        values = values[order]
        vectors = vectors[:, order]
    return values, _canonical_signs(np.ascontiguousarray(vectors))


def _normalize_rows(vectors: np.ndarray) -> tuple[np.ndarray, int]:
    norms = np.linalg.norm(vectors, axis=1)
    tiny = np.finfo(float).eps * max(float(norms.max()), 1.0)
    zero = norms <= tiny
    safe = np.where(zero, 1.0, norms)
    # Zero rows stay as-is and are flagged; k-means will place them by
    # nearest center like any other point.
    return vectors / safe[:, None], int(zero.sum())


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    inertia_history: list


def _kmeans_pp_init(rows: np.ndarray, num: int, rng: np.random.Generator) -> np.ndarray:
    n = rows.shape[0]
    centers = np.empty((num, rows.shape[1]))
    centers[0] = rows[rng.integers(n)]
    d2 = ((rows - centers[0]) ** 2).sum(axis=1)
    for c in range(1, num):
        total = d2.sum()
        if total > 0:
            choice = rng.choice(n, p=d2 / total)
        else:
            choice = rng.integers(n)
        centers[c] = rows[choice]
        d2 = np.minimum(d2, ((rows - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(rows: np.ndarray, centers: np.ndarray, max_iter: int) -> KMeansResult:
    n, num = rows.shape[0], centers.shape[0]
    prev_labels = None
    history = []
    for _ in range(max_iter):
        d2 = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        empties = [c for c in range(num) if not np.any(labels == c)]
        if empties:
            # Revive each empty cluster on the currently worst-served point;
            # moving the center onto the point keeps the objective monotone.
            served = d2[np.arange(n), labels].copy()
            for c in empties:
                worst = int(served.argmax())
                centers[c] = rows[worst]
                labels[worst] = c
                served[worst] = -1.0
        inertia = float(((rows - centers[labels]) ** 2).sum())
        assert not history or inertia <= history[-1] * (1 + 1e-12) + 1e-12, \
            "within-cluster sum of squares increased during Lloyd iteration"
        history.append(inertia)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        for c in range(num):
            centers[c] = rows[labels == c].mean(axis=0)
    return KMeansResult(labels=labels, centers=centers,
                        inertia=history[-1], inertia_history=history)


def kmeans_fit(rows: np.ndarray, num_clusters: int, restarts: int = 10,
               max_iter: int = 300, seed: Optional[int] = None) -> KMeansResult:
    """Best-of-restarts k-means++ with Lloyd iteration; deterministic by seed.

    With fewer distinct rows than clusters the surplus clusters collapse:
    duplicated centers leave some clusters holding a single revived point or,
    for fully identical data, everything lands in one cluster.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-D array")
    if not np.all(np.isfinite(rows)):
        raise ValueError("rows must be finite")
    n = rows.shape[0]
    if num_clusters > n:
        raise ValueError(f"num_clusters={num_clusters} exceeds n={n}")
    rng = np.random.default_rng(seed)
    best: Optional[KMeansResult] = None
    for _ in range(restarts):
        centers = _kmeans_pp_init(rows, num_clusters, rng)
        fit = _lloyd(rows, centers.copy(), max_iter)
        if best is None or fit.inertia < best.inertia:
            best = fit
    return best


def kmeans(rows: np.ndarray, num_clusters: int, restarts: int = 10,
           max_iter: int = 300, seed: Optional[int] = None) -> np.ndarray:
    """Labels from kmeans_fit."""
    return kmeans_fit(rows, num_clusters, restarts, max_iter, seed).labels


def spectral_cluster(similarity, config: SpectralConfig,
                     true_labels: Optional[np.ndarray] = None) -> ClusteringResult:
    """Cluster a similarity matrix; scores accuracy when truth is supplied."""
    operator = normalized_operator(similarity)
    n = operator.shape[0]
    if config.num_clusters > n:
        raise ValueError("more clusters requested than points")

    t0 = time.perf_counter()
    values, vectors = top_eigenvectors(operator, config.num_clusters,
                                       solver=config.eigsolver, seed=config.seed,
                                       max_matvecs=config.max_matvecs)
    t_eigen = time.perf_counter() - t0

    embedding, zero_rows = _normalize_rows(vectors)
    t0 = time.perf_counter()
    fit = kmeans_fit(embedding, config.num_clusters,
                     restarts=config.kmeans_restarts,
                     max_iter=config.kmeans_max_iter, seed=config.seed)
    t_kmeans = time.perf_counter() - t0

    acc = None
    if true_labels is not None:
        from .evaluate import accuracy
        acc = accuracy(fit.labels, true_labels)
    return ClusteringResult(
        labels=fit.labels,
        num_clusters=config.num_clusters,
        accuracy=acc,
        timings={"eigen": t_eigen, "kmeans": t_kmeans},
        config=asdict(config),
        eigenvalues=values,
        zero_embedding_rows=zero_rows,
    )
