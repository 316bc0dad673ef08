import numpy as np
import pytest
import scipy.sparse as sp

from pathcluster import (EigenSolverError, SpectralConfig, accuracy, kmeans,
                         kmeans_fit, normalized_operator, spectral_cluster,
                         top_eigenvectors)
from pathcluster.spectral import _normalize_rows

from conftest import random_points


def block_similarity(sizes, rng=None, noise=0.0):
    n = sum(sizes)
    mat = np.zeros((n, n))
    start = 0
    for size in sizes:
        mat[start:start + size, start:start + size] = 1.0
        start += size
    if noise and rng is not None:
        bump = rng.random((n, n)) * noise
        mat = mat + bump + bump.T
    np.fill_diagonal(mat, 0.0)
    return mat


def block_labels(sizes):
    return np.repeat(np.arange(len(sizes)), sizes)


def test_disconnected_blocks_recovered_exactly():
    sim = block_similarity([3, 4])
    result = spectral_cluster(sim, SpectralConfig(num_clusters=2, seed=0),
                              true_labels=block_labels([3, 4]))
    assert result.accuracy == 1.0


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    sim = block_similarity([10, 14, 9], rng, noise=0.01)
    labels = block_labels([10, 14, 9])
    perm = rng.permutation(33)
    permuted = sim[np.ix_(perm, perm)]
    a = spectral_cluster(sim, SpectralConfig(num_clusters=3, seed=1)).labels
    b = spectral_cluster(permuted, SpectralConfig(num_clusters=3, seed=1)).labels
    # the partition must be the same once mapped back through the permutation
    assert accuracy(a[perm], b) == 1.0
    assert accuracy(a, labels) == 1.0


@pytest.mark.parametrize("solver", ["dense", "iterative"])
def test_eigen_residuals(solver):
    rng = np.random.default_rng(7)
    raw = rng.random((120, 120))
    sym = (raw + raw.T) / 2.0
    operator = sp.csr_matrix(sym) if solver == "iterative" else sym
    values, vectors = top_eigenvectors(operator, 4, solver=solver, seed=0)
    norm = np.abs(np.linalg.eigvalsh(sym)).max()
    for i in range(4):
        residual = np.linalg.norm(sym @ vectors[:, i] - values[i] * vectors[:, i])
        assert residual <= 1e-8 * norm


def test_dense_and_iterative_agree():
    rng = np.random.default_rng(11)
    raw = rng.random((250, 250))
    sym = (raw + raw.T) / 2.0
    dense_vals, _ = top_eigenvectors(sym, 5, solver="dense")
    iter_vals, _ = top_eigenvectors(sp.csr_matrix(sym), 5, solver="iterative", seed=0)
    assert np.max(np.abs(dense_vals - iter_vals)) < 1e-6


def test_normalized_spectrum_range():
    rng = np.random.default_rng(5)
    sim = block_similarity([12, 12], rng, noise=0.2)  # noise connects the graph
    operator = normalized_operator(sim)
    values = np.linalg.eigvalsh(operator)
    assert values.min() >= -1.0 - 1e-10
    assert abs(values.max() - 1.0) <= 1e-10


def test_row_normalization_flags_zero_rows():
    vectors = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
    normalized, zero_rows = _normalize_rows(vectors)
    assert zero_rows == 1
    assert abs(np.linalg.norm(normalized[0]) - 1.0) < 1e-15
    assert np.all(normalized[1] == 0.0)


def test_zero_degree_vertex_handled():
    sim = block_similarity([4, 4])
    sim[3, :] = 0.0
    sim[:, 3] = 0.0  # isolate one vertex
    result = spectral_cluster(sim, SpectralConfig(num_clusters=2, seed=0))
    assert len(result.labels) == 8
    assert result.zero_embedding_rows >= 0


def test_kmeans_separated_pairs():
    rows = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    fit = kmeans_fit(rows, 2, restarts=4, seed=0)
    assert fit.labels[0] == fit.labels[1]
    assert fit.labels[2] == fit.labels[3]
    assert fit.labels[0] != fit.labels[2]
    assert abs(fit.inertia - 1.0) < 1e-12  # four points at 0.5 from their centers


def test_kmeans_identical_points_terminates():
    rows = np.ones((6, 2))
    fit = kmeans_fit(rows, 2, restarts=2, seed=1)
    assert fit.inertia == 0.0
    assert set(fit.labels.tolist()) <= {0, 1}


def test_kmeans_beats_random_assignments(rng):
    rows = random_points(100, 3, seed=2)
    fit = kmeans_fit(rows, 4, restarts=5, seed=3)
    for _ in range(50):
        labels = rng.integers(0, 4, size=100)
        centers = np.stack([rows[labels == c].mean(axis=0) if np.any(labels == c)
                            else rows[0] for c in range(4)])
        wcss = ((rows - centers[labels]) ** 2).sum()
        assert fit.inertia <= wcss + 1e-9


def test_kmeans_wcss_monotone(rng):
    for trial in range(20):
        rows = random_points(40, 2, seed=trial)
        fit = kmeans_fit(rows, 3, restarts=1, seed=trial)
        history = np.asarray(fit.inertia_history)
        assert np.all(np.diff(history) <= 1e-9)


def test_kmeans_deterministic_and_validated():
    rows = random_points(30, 2, seed=1)
    assert np.array_equal(kmeans(rows, 3, seed=5), kmeans(rows, 3, seed=5))
    with pytest.raises(ValueError, match="exceeds"):
        kmeans(rows, 31)
    with pytest.raises(ValueError, match="finite"):
        kmeans(np.array([[np.inf, 0.0]]), 1)


def test_eigensolver_nonconvergence_error():
    # a path graph's top of spectrum is packed with O(1/n^2) gaps; one
    # restart iteration cannot resolve it
    n = 2000
    graph = sp.diags([np.ones(n - 1), np.ones(n - 1)], [1, -1], format="csr")
    operator = normalized_operator(graph)
    with pytest.raises(EigenSolverError, match="iteration"):
        top_eigenvectors(operator, 3, solver="iterative", seed=0, max_matvecs=21)


def test_config_validation():
    with pytest.raises(ValueError, match="num_clusters"):
        SpectralConfig(num_clusters=1)
    with pytest.raises(ValueError, match="eigsolver"):
        SpectralConfig(num_clusters=2, eigsolver="magic")
    with pytest.raises(ValueError, match="restarts"):
        SpectralConfig(num_clusters=2, kmeans_restarts=0)


def test_result_serialization():
    sim = block_similarity([5, 5])
    result = spectral_cluster(sim, SpectralConfig(num_clusters=2, seed=0),
                              true_labels=block_labels([5, 5]))
    import json
    record = json.loads(result.to_json())
    assert record["accuracy"] == 1.0
    assert set(record["timings"]) == {"eigen", "kmeans"}
    assert record["config"]["num_clusters"] == 2
    assert len(record["labels"]) == 10
    slim = json.loads(result.to_json(include_labels=False))
    assert "labels" not in slim
