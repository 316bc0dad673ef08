"""Clustering accuracy and the batch experiments behind the report commands.

Accuracy is the best fraction of agreement over all matchings between
predicted and true cluster ids, found by optimal assignment on the label
contingency matrix, so any relabeling of either side scores identically.
Experiment runners regenerate synthetic data fresh for every trial and vary
only pipeline seeds for fixed datasets; all timings cover similarity
construction and the spectral solve, never data generation or loading.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dataset import Dataset, SyntheticSpec, generate
from .euclidean import build_index
from .metrics import check_power, intra_inter_stats
from .similarity import (build_full_similarity, build_knn_similarity,
                         build_unweighted_knn)
from .spectral import ClusteringResult, SpectralConfig, spectral_cluster

VARIANTS = ("knn", "full", "unweighted")


def accuracy(predicted, truth) -> float:
    """Permutation-invariant fraction of correctly clustered points."""
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError("predicted and true labels must be equal-length vectors")
    n = predicted.size
    if n == 0:
        raise ValueError("empty label vectors")
    pk = predicted.max() + 1
    tk = truth.max() + 1
    if predicted.min() < 0 or truth.min() < 0:
        raise ValueError("labels must be non-negative")
    side = max(pk, tk)
    contingency = np.zeros((side, side), dtype=np.int64)
    np.add.at(contingency, (predicted, truth), 1)
    row, col = linear_sum_assignment(contingency, maximize=True)
    return float(contingency[row, col].sum()) / n


@dataclass
class TrialReport:
    """Aggregate of repeated clustering trials for one (dataset, p, variant)."""

    dataset: str
    p: float
    variant: str
    accuracies: list = field(default_factory=list)
    timings_mean: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        vals = np.asarray(self.accuracies)
        return float(vals.std(ddof=1)) if len(vals) > 1 else 0.0

    @property
    def trials(self) -> int:
        return len(self.accuracies)

    def to_record(self) -> dict:
        return {
            "dataset": self.dataset,
            "p": "inf" if math.isinf(self.p) else self.p,
            "variant": self.variant,
            "trials": self.trials,
            "mean_accuracy": self.mean,
            "std_accuracy": self.std,
            "accuracies": [float(a) for a in self.accuracies],
            "timings_mean": self.timings_mean,
            "seeds": self.seeds,
            "params": self.params,
        }


def cluster_pipeline(data: Dataset, p=2.0, k: int = 15, r: int = 10,
                     variant: str = "knn", num_clusters: Optional[int] = None,
                     config: Optional[SpectralConfig] = None,
                     seed: Optional[int] = None) -> ClusteringResult:
    """Similarity build plus spectral clustering for one dataset.

    The similarity-build wall time is recorded under timings['graph'].
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    p = check_power(p)
    if config is None:
        if num_clusters is None:
            if data.num_clusters is None:
                raise ValueError("num_clusters is required for unlabeled data")
            num_clusters = data.num_clusters
        config = SpectralConfig(num_clusters=num_clusters, seed=seed)

    t0 = time.perf_counter()
    if variant == "full":
        sim = build_full_similarity(data, r=r)
    else:
        index = build_index(data)
        if variant == "knn":
            sim = build_knn_similarity(index, k=k, r=r, p=p)
        else:
            sim = build_unweighted_knn(index, k=k, p=p)
    t_graph = time.perf_counter() - t0

    result = spectral_cluster(sim, config, true_labels=data.labels)
    result.timings["graph"] = t_graph
    result.timings["total"] = t_graph + result.timings["eigen"] + result.timings["kmeans"]
    return result


def _trial_seeds(base_seed: int, trials: int) -> list[tuple[int, int]]:
    """Independent (data, pipeline) seed pairs per trial, derived from one root."""
    root = np.random.SeedSequence(base_seed)
    pairs = []
    for child in root.spawn(trials):
        a, b = child.generate_state(2)
        pairs.append((int(a), int(b)))
    return pairs


def _run_trials(tasks, threads: int = 1):
    if threads <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda task: task(), tasks))


def run_table_experiment(family: Optional[str] = None,
                         data: Optional[Dataset] = None,
                         p_values: Sequence = (1.0, 2.0, 10.0, math.inf),
                         variants: Sequence[str] = ("knn",),
                         trials: int = 50,
                         seed: int = 0,
                         k: int = 15, r: int = 10,
                         points_per_cluster=None,
                         ambient_dim: int = 50,
                         noise_sigma: float = 0.14,
                         num_clusters: Optional[int] = None,
                         eigsolver: str = "auto",
                         threads: int = 1) -> list[TrialReport]:
    """Accuracy table over (variant, p) cells.

    Synthetic families draw a fresh dataset per trial; a fixed dataset keeps
    its points and varies only the pipeline seed. The same per-trial data
    seeds are shared across cells so that cells differ in metric, not draws.
    The 'full' variant ignores p and appears once.
    """
    if (family is None) == (data is None):
        raise ValueError("pass exactly one of family or data")
    p_values = [check_power(p) for p in p_values]
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    seed_pairs = _trial_seeds(seed, trials)

    datasets: list[Dataset] = []
    for data_seed, _ in seed_pairs:
        if family is not None:
            spec = SyntheticSpec(family=family, points_per_cluster=points_per_cluster,
                                 ambient_dim=ambient_dim, noise_sigma=noise_sigma,
                                 seed=data_seed)
            datasets.append(generate(spec))
        else:
            datasets.append(data)

    name = family if family is not None else data.name
    reports = []
    cells = []
    for variant in variants:
        cells.extend((variant, p) for p in (p_values if variant != "full" else [1.0]))
    for variant, p in cells:
        report = TrialReport(dataset=name, p=p, variant=variant,
                             params={"k": k, "r": r, "trials": trials,
                                     "seed": seed, "eigsolver": eigsolver})
        tasks = []
        for t in range(trials):
            def task(t=t, variant=variant, p=p):
                ds = datasets[t]
                cfg = SpectralConfig(
                    num_clusters=num_clusters or ds.num_clusters,
                    eigsolver=eigsolver, seed=seed_pairs[t][1])
                return cluster_pipeline(ds, p=p, k=k, r=r, variant=variant,
                                        config=cfg)
            tasks.append(task)
        for t, result in enumerate(_run_trials(tasks, threads)):
            report.accuracies.append(result.accuracy)
            report.seeds.append(seed_pairs[t][0])
            for stage, val in result.timings.items():
                report.timings_mean[stage] = report.timings_mean.get(stage, 0.0) + val
        for stage in report.timings_mean:
            report.timings_mean[stage] /= trials
        reports.append(report)
    return reports


def run_p_sweep(family: str = "three-lines",
                points_per_cluster: int = 300,
                dims: Sequence[int] = (10, 50, 100),
                p_values: Sequence = tuple(range(1, 21)),
                trials: int = 10,
                seed: int = 0,
                k: int = 15, r: int = 10,
                noise_sigma: float = 0.14,
                eigsolver: str = "auto",
                threads: int = 1) -> list[dict]:
    """Accuracy as a function of the power p, per ambient dimension."""
    rows = []
    for dim in dims:
        reports = run_table_experiment(
            family=family, p_values=[check_power(p) for p in p_values],
            variants=("knn",), trials=trials, seed=seed, k=k, r=r,
            points_per_cluster=points_per_cluster, ambient_dim=dim,
            noise_sigma=noise_sigma, eigsolver=eigsolver, threads=threads)
        for report in reports:
            rows.append({"dim": dim, "p": report.p, "mean_accuracy": report.mean,
                         "std_accuracy": report.std, "trials": report.trials})
    return rows


def run_separation_experiment(family: str = "one-circle",
                              n_values: Sequence[int] = (250, 500, 1000),
                              p=2.0,
                              trials: int = 10,
                              seed: int = 0,
                              ambient_dim: int = 2,
                              noise_sigma: float = 0.0,
                              oracle_cap: int = 2000) -> list[dict]:
    """Quartiles of the intra/inter path-distance extremes versus sample size.

    Data is drawn noise-free on the manifolds; the inter-cluster fields are
    None for single-cluster families.
    """
    p = check_power(p)
    rows = []
    for n_total in n_values:
        spec_probe = SyntheticSpec(family=family, ambient_dim=ambient_dim,
                                   noise_sigma=noise_sigma, seed=0)
        m = spec_probe.num_manifolds()
        per = max(1, round(n_total / m))
        eps1_vals, eps2_vals = [], []
        for data_seed, _ in _trial_seeds(seed + n_total, trials):
            spec = SyntheticSpec(family=family, points_per_cluster=per,
                                 ambient_dim=ambient_dim,
                                 noise_sigma=noise_sigma, seed=data_seed)
            ds = generate(spec)
            eps1, eps2 = intra_inter_stats(ds, p, cap=oracle_cap)
            eps1_vals.append(eps1)
            if eps2 is not None:
                eps2_vals.append(eps2)
        row = {"n": per * m, "p": "inf" if math.isinf(p) else p, "trials": trials,
               "eps1_median": float(np.median(eps1_vals)),
               "eps1_q1": float(np.percentile(eps1_vals, 25)),
               "eps1_q3": float(np.percentile(eps1_vals, 75)),
               "eps1_max": float(np.max(eps1_vals))}
        if eps2_vals:
            row.update({"eps2_median": float(np.median(eps2_vals)),
                        "eps2_min": float(np.min(eps2_vals))})
        else:
            row.update({"eps2_median": None, "eps2_min": None})
        rows.append(row)
    return rows


def run_scaling_benchmark(family: str = "three-lines",
                          n_values: Sequence[int] = (5000, 10000, 20000),
                          p=2.0, k: int = 15, r: Optional[int] = None,
                          seed: int = 0,
                          ambient_dim: int = 5,
                          noise_sigma: float = 0.14,
                          repeats: int = 1) -> list[dict]:
    """Wall time of the full path k-NN graph build at growing n.

    Each row reports the best of `repeats` timed builds (index construction
    included) plus the ratio to the previous row. The default ambient
    dimension stays low: near-logarithmic tree queries, and hence the
    near-linear overall build this measures, are properties of data whose
    nearest-neighbor radius is small against the coordinate spread.
    """
    p = check_power(p)
    if r is None:
        r = min(10, k)
    rows = []
    prev = None
    for n_total in n_values:
        spec = SyntheticSpec(family=family,
                             points_per_cluster=max(1, round(n_total / 3)),
                             ambient_dim=ambient_dim, noise_sigma=noise_sigma,
                             seed=seed)
        ds = generate(spec)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            index = build_index(ds)
            build_knn_similarity(index, k=k, r=r, p=p)
            best = min(best, time.perf_counter() - t0)
        row = {"n": ds.n, "seconds": best,
               "ratio_to_previous": None if prev is None else best / prev}
        prev = best
        rows.append(row)
    return rows
