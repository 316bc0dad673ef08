import itertools
import math

import numpy as np
import pytest

from pathcluster import (Dataset, INFINITY, SyntheticSpec, accuracy,
                         cluster_pipeline, generate, run_p_sweep,
                         run_scaling_benchmark, run_separation_experiment,
                         run_table_experiment)

from conftest import random_points


def exhaustive_accuracy(predicted, truth):
    """Best fraction-correct over every relabeling of the predictions."""
    ell = max(predicted.max(), truth.max()) + 1
    best = 0.0
    for perm in itertools.permutations(range(ell)):
        mapped = np.asarray(perm)[predicted]
        best = max(best, float(np.mean(mapped == truth)))
    return best


def test_accuracy_trivial_cases():
    truth = np.array([0, 0, 1, 1])
    assert accuracy(truth, truth) == 1.0
    assert accuracy(1 - truth, truth) == 1.0
    assert accuracy(np.array([0, 1, 1, 1]), truth) == 0.75


def test_accuracy_matches_exhaustive_search(rng):
    for _ in range(60):
        n = int(rng.integers(4, 40))
        ell = int(rng.integers(2, 5))
        predicted = rng.integers(0, ell, size=n)
        truth = rng.integers(0, ell, size=n)
        assert abs(accuracy(predicted, truth)
                   - exhaustive_accuracy(predicted, truth)) < 1e-12


def test_accuracy_relabeling_invariance(rng):
    for _ in range(60):
        n = int(rng.integers(4, 50))
        ell = int(rng.integers(2, 6))
        predicted = rng.integers(0, ell, size=n)
        truth = rng.integers(0, ell, size=n)
        base = accuracy(predicted, truth)
        perm_p = rng.permutation(ell)
        perm_t = rng.permutation(ell)
        assert accuracy(perm_p[predicted], truth) == base
        assert accuracy(predicted, perm_t[truth]) == base


def test_accuracy_validation():
    with pytest.raises(ValueError, match="equal-length"):
        accuracy(np.array([0, 1]), np.array([0, 1, 1]))
    with pytest.raises(ValueError, match="non-negative"):
        accuracy(np.array([0, -1]), np.array([0, 1]))


def tiny_moons(seed=0):
    return generate(SyntheticSpec("three-moons", points_per_cluster=30,
                                  ambient_dim=5, noise_sigma=0.12, seed=seed))


def test_cluster_pipeline_record():
    result = cluster_pipeline(tiny_moons(), p=2, k=8, r=4, seed=3)
    assert 0.0 <= result.accuracy <= 1.0
    assert set(result.timings) >= {"graph", "eigen", "kmeans", "total"}
    assert all(v >= 0 for v in result.timings.values())
    assert len(result.labels) == 90
    assert result.config["num_clusters"] == 3


def test_cluster_pipeline_variants():
    data = tiny_moons()
    for variant in ("knn", "full", "unweighted"):
        result = cluster_pipeline(data, p=2, k=8, r=4, variant=variant, seed=0)
        assert len(result.labels) == data.n
    with pytest.raises(ValueError, match="variant"):
        cluster_pipeline(data, variant="dense")
    with pytest.raises(ValueError, match="num_clusters"):
        cluster_pipeline(Dataset(points=random_points(20, 2, seed=0)), p=2, k=4, r=2)


def test_table_experiment_structure_and_determinism():
    kwargs = dict(family="three-moons", p_values=(1.0, INFINITY),
                  variants=("knn",), trials=3, seed=9, k=6, r=3,
                  points_per_cluster=25, ambient_dim=5, noise_sigma=0.12)
    reports = run_table_experiment(**kwargs)
    assert [r.p for r in reports] == [1.0, INFINITY]
    for rep in reports:
        assert rep.trials == 3
        assert len(rep.seeds) == 3
        assert 0.0 <= rep.mean <= 1.0
        assert rep.std >= 0.0
        assert {"graph", "eigen", "kmeans"} <= set(rep.timings_mean)
    again = run_table_experiment(**kwargs)
    for a, b in zip(reports, again):
        assert a.accuracies == b.accuracies


def test_table_experiment_full_variant_collapses_p():
    reports = run_table_experiment(family="three-moons", p_values=(1.0, 2.0),
                                   variants=("full",), trials=2, seed=1,
                                   points_per_cluster=20, ambient_dim=4,
                                   noise_sigma=0.1)
    assert len(reports) == 1  # the dense Euclidean baseline ignores p


def test_table_experiment_fixed_dataset():
    data = tiny_moons(seed=4)
    reports = run_table_experiment(data=data, p_values=(2.0,), trials=3, seed=0,
                                   k=6, r=3)
    assert reports[0].dataset == data.name
    assert reports[0].trials == 3
    with pytest.raises(ValueError, match="exactly one"):
        run_table_experiment(family="three-moons", data=data)
    with pytest.raises(ValueError, match="exactly one"):
        run_table_experiment()


def test_separation_experiment_single_cluster():
    rows = run_separation_experiment(family="one-circle", n_values=(40, 80),
                                     p=2, trials=3, seed=1)
    assert [row["n"] for row in rows] == [40, 80]
    for row in rows:
        assert row["eps1_median"] > 0
        assert row["eps2_median"] is None
        assert row["eps1_q1"] <= row["eps1_median"] <= row["eps1_q3"]


def test_separation_experiment_three_lines_floor():
    rows = run_separation_experiment(family="three-lines", n_values=(60,),
                                     p=2, trials=3, seed=2)
    assert rows[0]["eps2_min"] >= 1.0 - 1e-9


def test_p_sweep_rows():
    rows = run_p_sweep(points_per_cluster=15, dims=(3, 5), p_values=(1, 4),
                       trials=2, seed=0, k=5, r=3, noise_sigma=0.1)
    assert len(rows) == 4
    assert {(row["dim"], row["p"]) for row in rows} == {(3, 1.0), (3, 4.0),
                                                        (5, 1.0), (5, 4.0)}
    for row in rows:
        assert 0.0 <= row["mean_accuracy"] <= 1.0


def test_scaling_benchmark_rows():
    rows = run_scaling_benchmark(n_values=(150, 300), p=2, k=5,
                                 ambient_dim=3, seed=0)
    assert rows[0]["ratio_to_previous"] is None
    assert rows[1]["ratio_to_previous"] == rows[1]["seconds"] / rows[0]["seconds"]
    assert all(row["seconds"] > 0 for row in rows)


def test_trial_report_record():
    reports = run_table_experiment(family="three-moons", p_values=(2.0,),
                                   trials=2, seed=5, k=5, r=3,
                                   points_per_cluster=15, ambient_dim=4,
                                   noise_sigma=0.1)
    record = reports[0].to_record()
    assert record["p"] == 2.0
    assert record["trials"] == 2
    assert len(record["accuracies"]) == 2
    inf_reports = run_table_experiment(family="three-moons", p_values=(math.inf,),
                                       trials=1, seed=5, k=5, r=3,
                                       points_per_cluster=15, ambient_dim=4,
                                       noise_sigma=0.1)
    assert inf_reports[0].to_record()["p"] == "inf"
