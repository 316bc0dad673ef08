import json
import math

import numpy as np
import pytest

from pathcluster import Dataset, SyntheticSpec, generate, load_csv, save_csv, write_descriptor
from pathcluster.dataset import THREE_CIRCLES_COUNTS, _CIRCLE_RADII


def test_three_lines_default_scale():
    data = generate(SyntheticSpec("three-lines", seed=7))
    assert data.n == 1500
    assert data.dim == 50
    assert data.num_clusters == 3
    assert data.cluster_sizes() == [500, 500, 500]


def test_three_circles_default_counts():
    data = generate(SyntheticSpec("three-circles", ambient_dim=2, noise_sigma=0.0, seed=1))
    assert data.cluster_sizes() == list(THREE_CIRCLES_COUNTS)
    assert data.n == 1500


def test_three_circles_zero_noise_on_manifold():
    data = generate(SyntheticSpec("three-circles", ambient_dim=2, noise_sigma=0.0, seed=3))
    radii = np.linalg.norm(data.points, axis=1)
    for cluster, radius in enumerate(_CIRCLE_RADII):
        got = radii[data.labels == cluster]
        assert np.max(np.abs(got - radius)) < 1e-12


def test_three_moons_zero_noise_on_manifold():
    data = generate(SyntheticSpec("three-moons", ambient_dim=2, noise_sigma=0.0, seed=3))
    arcs = [((0.0, 0.0), 1.0, 1), ((1.5, 0.4), 1.5, -1), ((3.0, 0.0), 1.0, 1)]
    for cluster, (center, radius, side) in enumerate(arcs):
        pts = data.points[data.labels == cluster]
        dist = np.linalg.norm(pts - np.asarray(center), axis=1)
        assert np.max(np.abs(dist - radius)) < 1e-12
        # upper arcs stay above their center, the middle one below
        assert np.all(side * (pts[:, 1] - center[1]) >= -1e-12)


def test_three_lines_zero_noise_geometry():
    data = generate(SyntheticSpec("three-lines", ambient_dim=2, noise_sigma=0.0, seed=5))
    ys = data.points[:, 1]
    for cluster, y in enumerate((0.0, 1.0, 2.0)):
        assert np.all(ys[data.labels == cluster] == y)
    assert data.points[:, 0].min() >= 0.0
    assert data.points[:, 0].max() <= 5.0


def test_three_lines_min_inter_cluster_distance():
    # separation between the lines is 1; samples approach it from above
    data = generate(SyntheticSpec("three-lines", ambient_dim=2, noise_sigma=0.0, seed=11))
    best = math.inf
    for a in range(3):
        pa = data.points[data.labels == a]
        for b in range(a + 1, 3):
            pb = data.points[data.labels == b]
            d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1)
            best = min(best, math.sqrt(d2.min()))
    assert best >= 1.0 - 1e-12
    assert best <= 1.0 + 1e-6


def test_zero_padding_before_noise():
    data = generate(SyntheticSpec("three-lines", ambient_dim=7, noise_sigma=0.0, seed=2))
    assert np.all(data.points[:, 2:] == 0.0)


def test_generate_deterministic_bitwise():
    spec = SyntheticSpec("three-moons", ambient_dim=12, noise_sigma=0.14, seed=42)
    a = generate(spec)
    b = generate(spec)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.labels, b.labels)
    c = generate(SyntheticSpec("three-moons", ambient_dim=12, noise_sigma=0.14, seed=43))
    assert not np.array_equal(a.points, c.points)


def test_one_circle_single_cluster():
    data = generate(SyntheticSpec("one-circle", points_per_cluster=80,
                                  ambient_dim=2, noise_sigma=0.0, seed=0))
    assert data.n == 80
    assert data.num_clusters == 1
    assert np.max(np.abs(np.linalg.norm(data.points, axis=1) - 1.0)) < 1e-12


def test_spec_validation():
    with pytest.raises(ValueError, match="ambient_dim"):
        SyntheticSpec("three-lines", ambient_dim=1)
    with pytest.raises(ValueError, match="family"):
        SyntheticSpec("four-squares")
    with pytest.raises(ValueError, match="noise_sigma"):
        SyntheticSpec("three-lines", noise_sigma=-0.1)
    with pytest.raises(ValueError, match="positive"):
        SyntheticSpec("three-lines", points_per_cluster=0)
    with pytest.raises(ValueError, match="cluster counts"):
        SyntheticSpec("three-lines", points_per_cluster=(10, 20))


def test_dataset_validation():
    with pytest.raises(ValueError, match="finite"):
        Dataset(points=np.array([[0.0, np.nan]]))
    with pytest.raises(ValueError, match="labels"):
        Dataset(points=np.zeros((3, 2)), labels=np.array([0, 1]))
    with pytest.raises(ValueError, match="0..L-1"):
        Dataset(points=np.zeros((3, 2)), labels=np.array([0, 2, 2]))


def test_load_csv_basic(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("1.0,2.0\n3.0,4.0\n5.0,6.0\n")
    data = load_csv(path)
    assert data.n == 3
    assert data.dim == 2
    assert data.labels is None
    assert data.points[2, 1] == 6.0


def test_load_csv_label_remap(tmp_path):
    path = tmp_path / "lab.csv"
    path.write_text("1,2,a\n3,4,b\n5,6,a\n")
    data = load_csv(path, label_column=2)
    assert data.dim == 2
    assert data.labels.tolist() == [0, 1, 0]


def test_load_csv_negative_label_column(tmp_path):
    path = tmp_path / "lab.csv"
    path.write_text("1,2,9\n3,4,7\n5,6,9\n")
    data = load_csv(path, label_column=-1)
    assert data.labels.tolist() == [1, 0, 1]


def test_load_csv_header_by_name(tmp_path):
    path = tmp_path / "head.csv"
    path.write_text("x0,x1,label\n1,2,0\n3,4,1\n")
    data = load_csv(path, label_column="label")
    assert data.n == 2
    assert data.labels.tolist() == [0, 1]


def test_load_csv_errors(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3,4\n5\n")
    with pytest.raises(ValueError, match="row 3"):
        load_csv(ragged)

    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    with pytest.raises(ValueError, match="row 2"):
        load_csv(bad)

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_csv(empty)

    missing_name = tmp_path / "named.csv"
    missing_name.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="no header column"):
        load_csv(missing_name, label_column="label")


def test_csv_round_trip(tmp_path):
    data = generate(SyntheticSpec("three-moons", points_per_cluster=20,
                                  ambient_dim=6, noise_sigma=0.3, seed=9))
    path = tmp_path / "round.csv"
    save_csv(data, path)
    back = load_csv(path, label_column="label")
    assert np.array_equal(back.points, data.points)
    assert np.array_equal(back.labels, data.labels)


def test_descriptor(tmp_path):
    spec = SyntheticSpec("three-circles", ambient_dim=4, noise_sigma=0.1, seed=5)
    data = generate(spec)
    path = tmp_path / "desc.json"
    write_descriptor(data, path, spec)
    info = json.loads(path.read_text())
    assert info["n"] == 1500
    assert info["num_clusters"] == 3
    assert info["provenance"]["seed"] == 5
    assert info["provenance"]["noise_sigma"] == 0.1
