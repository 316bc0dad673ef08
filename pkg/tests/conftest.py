import numpy as np
import pytest

from pathcluster import Dataset

TIE_REL_TOL = 1e-12


def reference_knn_selection(row, k, rel_tol=TIE_REL_TOL):
    """Reference k-NN choice from an exact distance row.

    Written independently of the library: sort by distance, then walk the
    sorted list merging entries whose gaps stay within rel_tol into tie
    groups, and fill the last group by ascending index.
    """
    n = len(row)
    order = sorted(range(n), key=lambda i: (row[i], i))
    groups = []
    for i in order:
        if groups and row[i] - row[groups[-1][-1]] <= rel_tol * row[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    chosen = []
    for group in groups:
        room = k - len(chosen)
        if room <= 0:
            break
        chosen.extend(sorted(group)[:room])
    return np.asarray(sorted(chosen, key=lambda i: (row[i], i)))


def random_points(n, dim, seed, box=1.0):
    rng = np.random.default_rng(seed)
    return box * rng.random((n, dim))


def random_dataset(n, dim, seed, clusters=None, box=1.0):
    pts = random_points(n, dim, seed, box)
    labels = None
    if clusters:
        labels = np.arange(n) % clusters
    return Dataset(points=pts, labels=labels, name=f"random-{seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
