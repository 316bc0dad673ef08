"""Command-line interface: dataset generation, path k-NN queries, clustering
runs, accuracy tables, power sweeps, separation statistics, and benchmarks.

Every command is deterministic for a fixed --seed and embeds its effective
configuration in the JSON it writes, so a run can be reproduced from its own
output. Report commands write delimited data (CSV), a JSON record, and a PNG
figure side by side; figures can be switched off with --no-figures.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import click
import numpy as np

from . import evaluate
from .dataset import (FAMILIES, SyntheticSpec, generate, load_csv, save_csv,
                      write_descriptor)
from .euclidean import build_index
from .metrics import ORACLE_CAP, pairwise_exact
from .pathknn import path_knn, path_knn_all

_ENV_THREADS = "PATHCLUSTER_THREADS"
_ENV_ORACLE_CAP = "PATHCLUSTER_ORACLE_CAP"


def _parse_p(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise click.BadParameter(f"invalid power {text!r} (number >= 1 or 'inf')")


def _parse_p_list(text: str) -> list[float]:
    return [_parse_p(part) for part in text.split(",") if part.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _p_text(p) -> str:
    if isinstance(p, str):
        return p
    return "inf" if math.isinf(p) else f"{p:g}"


def _default_threads() -> int:
    env = os.environ.get(_ENV_THREADS)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _oracle_cap() -> int:
    env = os.environ.get(_ENV_ORACLE_CAP)
    return int(env) if env else ORACLE_CAP


def _guard(path: Path, force: bool) -> Path:
    if path.exists() and not force:
        raise click.ClickException(f"{path} exists; pass --force to overwrite")
    return path


def _load_dataset(path: str, label_column: str):
    """label_column: 'auto' uses a header column named label when present,
    'none' disables labels, otherwise an index or header name."""
    if label_column == "none":
        return load_csv(path, label_column=None)
    if label_column == "auto":
        first = Path(path).read_text().splitlines()[0] if Path(path).exists() else ""
        fields = [f.strip() for f in first.split(",")]
        if "label" in fields:
            return load_csv(path, label_column="label")
        return load_csv(path, label_column=None)
    try:
        return load_csv(path, label_column=int(label_column))
    except ValueError:
        return load_csv(path, label_column=label_column)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


@click.group()
@click.option("--threads", type=int, default=None,
              help=f"Worker threads for trial loops (default: machine "
                   f"parallelism; env {_ENV_THREADS}).")
@click.pass_context
def main(ctx, threads):
    """Path-metric clustering toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = threads if threads else _default_threads()


@main.command("generate")
@click.argument("family", type=click.Choice(FAMILIES))
@click.option("--n-per", type=str, default=None,
              help="Points per cluster: one int or comma list (default: 500; "
                   "three-circles: 222,500,778).")
@click.option("--dim", type=int, default=50, show_default=True)
@click.option("--sigma", type=float, default=0.14, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True,
              help="CSV destination; a JSON descriptor lands next to it.")
@click.option("--force", is_flag=True, help="Overwrite existing files.")
def generate_cmd(family, n_per, dim, sigma, seed, output, force):
    """Generate a synthetic dataset (CSV plus JSON descriptor)."""
    counts = None
    if n_per is not None:
        parsed = _parse_int_list(n_per)
        counts = parsed[0] if len(parsed) == 1 else parsed
    spec = SyntheticSpec(family=family, points_per_cluster=counts,
                         ambient_dim=dim, noise_sigma=sigma, seed=seed)
    data = generate(spec)
    out = _guard(Path(output), force)
    save_csv(data, out)
    meta = _guard(out.with_suffix(".json"), force)
    write_descriptor(data, meta, spec)
    click.echo(f"wrote {out} ({data.n} x {data.dim} + label) and {meta}")


@main.command()
@click.argument("data_path", type=click.Path(exists=True))
@click.option("--p", "p_text", default="2", show_default=True,
              help="Path power (number >= 1 or 'inf').")
@click.option("--k", type=int, default=15, show_default=True)
@click.option("--source", "sources", type=int, multiple=True,
              help="Source index; repeatable.")
@click.option("--all", "query_all", is_flag=True, help="Query every point.")
@click.option("--label-column", default="auto", show_default=True)
@click.option("--check-oracle", is_flag=True,
              help="Compare against the exact all-pairs oracle (small n only).")
@click.option("--check-euclidean", is_flag=True,
              help="With --p 1, compare against the Euclidean index.")
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Optional JSON destination for the neighbor lists.")
@click.option("--force", is_flag=True)
def knn(data_path, p_text, k, sources, query_all, label_column,
        check_oracle, check_euclidean, output, force):
    """Path k-nearest neighbors of one or more sources."""
    p = _parse_p(p_text)
    data = _load_dataset(data_path, label_column)
    index = build_index(data)
    if query_all:
        results = path_knn_all(index, k, p)
    elif sources:
        results = [path_knn(index, s, k, p) for s in sources]
    else:
        raise click.ClickException("pass --source at least once or --all")

    shown = results[:5] if query_all else results
    for res in shown:
        click.echo(f"source {res.source} (p={_p_text(p)}):")
        for rank, (idx, dist) in enumerate(res.pairs()):
            click.echo(f"  {rank:3d}  {idx:6d}  {dist:.12g}")
    if len(results) > len(shown):
        click.echo(f"... {len(results) - len(shown)} more sources queried")

    checks = {}
    if check_oracle:
        cap = _oracle_cap()
        if data.n > cap:
            raise click.ClickException(
                f"--check-oracle needs n <= {cap} (set {_ENV_ORACLE_CAP})")
        exact = pairwise_exact(data, p, cap=cap)
        deviation = 0.0
        sets_match = True
        for res in results:
            row = exact[res.source]
            order = np.lexsort((np.arange(data.n), row))[:k]
            sets_match &= set(order.tolist()) == set(res.indices.tolist())
            ref = row[res.indices]
            deviation = max(deviation, float(
                np.max(np.abs(res.distances - ref) / np.maximum(ref, 1e-300))))
        checks["oracle_max_relative_deviation"] = deviation
        checks["oracle_sets_match"] = bool(sets_match)
        click.echo(f"max deviation {deviation:.3e} "
                   f"(neighbor sets {'match' if sets_match else 'DIFFER'})")
    if check_euclidean:
        if p != 1.0:
            raise click.ClickException("--check-euclidean requires --p 1")
        worst = 0.0
        sets_match = True
        for res in results:
            ref = index.knn(res.source, k - 1)
            sets_match &= res.indices[1:].tolist() == ref.indices.tolist()
            if len(ref.distances):
                worst = max(worst, float(
                    np.max(np.abs(res.distances[1:] - ref.distances))))
        checks["euclidean_max_deviation"] = worst
        checks["euclidean_sets_match"] = bool(sets_match)
        click.echo(f"euclidean match: {'ok' if sets_match else 'MISMATCH'} "
                   f"(max deviation {worst:.3e})")

    if output:
        out = _guard(Path(output), force)
        payload = {
            "config": {"command": "knn", "data": str(data_path),
                       "p": _p_text(p), "k": k,
                       "sources": sorted(r.source for r in results) if not query_all else "all"},
            "results": [{"source": r.source, "neighbors": r.pairs()} for r in results],
            "checks": checks,
        }
        _write_json(out, payload)
        click.echo(f"wrote {out}")


@main.command()
@click.argument("data_path", type=click.Path(exists=True))
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--k", type=int, default=15, show_default=True)
@click.option("--r", type=int, default=10, show_default=True)
@click.option("--clusters", type=int, default=None,
              help="Number of clusters (default: from labels).")
@click.option("--variant", type=click.Choice(evaluate.VARIANTS),
              default="knn", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--label-column", default="auto", show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--force", is_flag=True)
def cluster(data_path, p_text, k, r, clusters, variant, seed, label_column,
            output, force):
    """Cluster one dataset and report labels plus accuracy."""
    p = _parse_p(p_text)
    data = _load_dataset(data_path, label_column)
    result = evaluate.cluster_pipeline(
        data, p=p, k=k, r=r, variant=variant,
        num_clusters=clusters, seed=seed)
    effective = {"command": "cluster", "data": str(data_path),
                 "p": _p_text(p), "k": k, "r": r, "variant": variant,
                 "clusters": result.num_clusters, "seed": seed}
    if result.accuracy is not None:
        click.echo(f"accuracy {100 * result.accuracy:.2f}%")
    click.echo("timings " + json.dumps({s: round(v, 4)
                                        for s, v in result.timings.items()}))
    if output:
        out = _guard(Path(output), force)
        payload = json.loads(result.to_json())
        payload["config"].update(effective)
        _write_json(out, payload)
        click.echo(f"wrote {out}")


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default=None)
@click.option("--data", "data_path", type=click.Path(exists=True), default=None)
@click.option("--p", "p_text", default="1,2,10,inf", show_default=True)
@click.option("--variants", default="knn", show_default=True,
              help="Comma list from knn,full,unweighted.")
@click.option("--trials", type=int, default=None,
              help="Default: 50 for synthetic families, 10 for loaded data.")
@click.option("--n-per", type=int, default=500, show_default=True)
@click.option("--dim", type=int, default=50, show_default=True)
@click.option("--sigma", type=float, default=0.14, show_default=True)
@click.option("--k", type=int, default=15, show_default=True)
@click.option("--r", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--label-column", default="auto", show_default=True)
@click.option("-o", "--outdir", type=click.Path(), default="table-out",
              show_default=True)
@click.option("--force", is_flag=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.pass_context
def table(ctx, family, data_path, p_text, variants, trials, n_per, dim, sigma,
          k, r, seed, label_column, outdir, force, figures):
    """Accuracy table across powers and similarity variants."""
    if (family is None) == (data_path is None):
        raise click.ClickException("pass exactly one of --family or --data")
    p_values = _parse_p_list(p_text)
    variant_list = tuple(v.strip() for v in variants.split(",") if v.strip())
    data = None
    if data_path is not None:
        data = _load_dataset(data_path, label_column)
        if data.labels is None:
            raise click.ClickException("table scoring needs labeled data")
    if trials is None:
        trials = 50 if family is not None else 10

    reports = evaluate.run_table_experiment(
        family=family, data=data, p_values=p_values, variants=variant_list,
        trials=trials, seed=seed, k=k, r=r,
        points_per_cluster=None if family == "three-circles" else n_per,
        ambient_dim=dim, noise_sigma=sigma, threads=ctx.obj["threads"])

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    effective = {"command": "table", "family": family, "data": data_path,
                 "p": [_p_text(p) for p in p_values], "variants": variant_list,
                 "trials": trials, "n_per": n_per, "dim": dim, "sigma": sigma,
                 "k": k, "r": r, "seed": seed}
    _write_json(_guard(out / "table.json", force),
                {"config": effective,
                 "reports": [rep.to_record() for rep in reports]})
    rows = [rep.to_record() for rep in reports]
    for row in rows:
        row["mean_accuracy_pct"] = 100 * row["mean_accuracy"]
        row["std_accuracy_pct"] = 100 * row["std_accuracy"]
    _write_csv(_guard(out / "table.csv", force), rows,
               ["dataset", "variant", "p", "trials",
                "mean_accuracy_pct", "std_accuracy_pct"])
    text = _format_table(reports)
    _guard(out / "table.txt", force).write_text(text + "\n")
    click.echo(text)
    if figures:
        from . import plots
        fig = plots.table_figure(reports, title=f"{reports[0].dataset}: accuracy")
        plots.save_figure(fig, _guard(out / "table.png", force))
    click.echo(f"wrote {out}/table.json .csv .txt" + (" .png" if figures else ""))


def _format_table(reports) -> str:
    header = (f"{'dataset':<14} {'variant':<10} {'p':>5} {'trials':>6} "
              f"{'accuracy':>16} {'graph_s':>8} {'eigen_s':>8} {'kmeans_s':>9}")
    lines = [header, "-" * len(header)]
    for rep in reports:
        tm = rep.timings_mean
        lines.append(
            f"{rep.dataset:<14} {rep.variant:<10} {_p_text(rep.p):>5} "
            f"{rep.trials:>6} {100 * rep.mean:>7.2f} +- {100 * rep.std:<5.2f} "
            f"{tm.get('graph', 0):>8.3f} {tm.get('eigen', 0):>8.3f} "
            f"{tm.get('kmeans', 0):>9.3f}")
    return "\n".join(lines)


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default="three-lines",
              show_default=True)
@click.option("--dims", default="10,50,100", show_default=True)
@click.option("--p-min", type=int, default=1, show_default=True)
@click.option("--p-max", type=int, default=20, show_default=True)
@click.option("--n-per", type=int, default=300, show_default=True)
@click.option("--sigma", type=float, default=0.14, show_default=True)
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--k", type=int, default=15, show_default=True)
@click.option("--r", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--outdir", type=click.Path(), default="sweep-out",
              show_default=True)
@click.option("--force", is_flag=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.pass_context
def sweep(ctx, family, dims, p_min, p_max, n_per, sigma, trials, k, r, seed,
          outdir, force, figures):
    """Accuracy versus power p, per ambient dimension."""
    rows = evaluate.run_p_sweep(
        family=family, points_per_cluster=n_per,
        dims=_parse_int_list(dims), p_values=range(p_min, p_max + 1),
        trials=trials, seed=seed, k=k, r=r, noise_sigma=sigma,
        threads=ctx.obj["threads"])
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    effective = {"command": "sweep", "family": family, "dims": dims,
                 "p_min": p_min, "p_max": p_max, "n_per": n_per,
                 "sigma": sigma, "trials": trials, "k": k, "r": r, "seed": seed}
    _write_json(_guard(out / "sweep.json", force),
                {"config": effective, "rows": rows})
    _write_csv(_guard(out / "sweep.csv", force), rows,
               ["p", "dim", "mean_accuracy", "std_accuracy", "trials"])
    if figures:
        from . import plots
        fig = plots.sweep_figure(rows, title=f"{family}: accuracy vs p")
        plots.save_figure(fig, _guard(out / "sweep.png", force))
    click.echo(f"wrote {out}/sweep.json .csv" + (" .png" if figures else ""))


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default="one-circle",
              show_default=True)
@click.option("--n-values", default="250,500,1000", show_default=True)
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--sigma", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--outdir", type=click.Path(), default="separation-out",
              show_default=True)
@click.option("--force", is_flag=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def separation(family, n_values, p_text, trials, dim, sigma, seed, outdir,
               force, figures):
    """Intra/inter path-distance extremes on noise-free manifolds."""
    rows = evaluate.run_separation_experiment(
        family=family, n_values=_parse_int_list(n_values), p=_parse_p(p_text),
        trials=trials, seed=seed, ambient_dim=dim, noise_sigma=sigma,
        oracle_cap=_oracle_cap())
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    effective = {"command": "separation", "family": family,
                 "n_values": n_values, "p": p_text, "trials": trials,
                 "dim": dim, "sigma": sigma, "seed": seed}
    _write_json(_guard(out / "separation.json", force),
                {"config": effective, "rows": rows})
    _write_csv(_guard(out / "separation.csv", force), rows,
               ["n", "p", "trials", "eps1_median", "eps1_q1", "eps1_q3",
                "eps1_max", "eps2_median", "eps2_min"])
    if figures:
        from . import plots
        fig = plots.separation_figure(rows)
        plots.save_figure(fig, _guard(out / "separation.png", force))
    click.echo(f"wrote {out}/separation.json .csv" + (" .png" if figures else ""))


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default="three-lines",
              show_default=True)
@click.option("--n-values", default="5000,10000,20000", show_default=True)
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--k", type=int, default=15, show_default=True)
@click.option("--dim", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--repeats", type=int, default=1, show_default=True)
@click.option("-o", "--outdir", type=click.Path(), default=None)
@click.option("--force", is_flag=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def bench(family, n_values, p_text, k, dim, seed, repeats, outdir, force,
          figures):
    """Wall-time scaling of the path k-NN graph build."""
    rows = evaluate.run_scaling_benchmark(
        family=family, n_values=_parse_int_list(n_values), p=_parse_p(p_text),
        k=k, seed=seed, ambient_dim=dim, repeats=repeats)
    for row in rows:
        ratio = row["ratio_to_previous"]
        click.echo(f"n={row['n']:>7d}  {row['seconds']:8.3f}s"
                   + (f"  x{ratio:.2f} over previous" if ratio else ""))
    if outdir:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        effective = {"command": "bench", "family": family, "n_values": n_values,
                     "p": p_text, "k": k, "dim": dim, "seed": seed,
                     "repeats": repeats}
        _write_json(_guard(out / "bench.json", force),
                    {"config": effective, "rows": rows})
        _write_csv(_guard(out / "bench.csv", force), rows,
                   ["n", "seconds", "ratio_to_previous"])
        if figures:
            from . import plots
            fig = plots.scaling_figure(rows)
            plots.save_figure(fig, _guard(out / "bench.png", force))
        click.echo(f"wrote {out}/bench.json .csv" + (" .png" if figures else ""))


if __name__ == "__main__":
    main()
