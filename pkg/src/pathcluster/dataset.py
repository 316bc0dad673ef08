"""Point-cloud data model, synthetic benchmark families, and CSV/JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

FAMILIES = ("three-lines", "three-moons", "three-circles", "one-circle")

# Default three-circles sizes: 1500 points total, density proportional to
# circumference so all three rings are sampled at roughly the same rate.
THREE_CIRCLES_COUNTS = (222, 500, 778)

_DEFAULT_COUNT = 500
_LINE_LENGTH = 5.0
_LINE_YS = (0.0, 1.0, 2.0)
# (center, radius, theta_start, theta_end); the middle moon hangs downward.
_MOON_ARCS = (
    ((0.0, 0.0), 1.0, 0.0, math.pi),
    ((1.5, 0.4), 1.5, math.pi, 2.0 * math.pi),
    ((3.0, 0.0), 1.0, 0.0, math.pi),
)
_CIRCLE_RADII = (1.0, 2.25, 3.5)


@dataclass(frozen=True)
class Dataset:
    """Immutable set of n points in R^D with optional integer cluster labels.

    Labels, when present, must cover 0..L-1 with every cluster non-empty.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "dataset"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("points must be a non-empty n x D array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must contain only finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must be a length-n vector")
            uniq = np.unique(lab)
            if lab.min() < 0 or not np.array_equal(uniq, np.arange(uniq.size)):
                raise ValueError("labels must cover 0..L-1 with no empty cluster")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def num_clusters(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1

    def cluster_sizes(self) -> Optional[list[int]]:
        if self.labels is None:
            return None
        return np.bincount(self.labels).tolist()


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic dataset: a 2-D manifold family embedded in R^D
    by zero padding, then isotropic Gaussian noise on every coordinate."""

    family: str
    points_per_cluster: Union[int, Sequence[int], None] = None
    ambient_dim: int = 50
    noise_sigma: float = 0.14
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.ambient_dim < 2:
            raise ValueError("ambient_dim must be at least 2 (the manifolds are planar)")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError("noise_sigma must be finite and non-negative")
        for c in self.cluster_counts():
            if c < 1:
                raise ValueError("points_per_cluster entries must be positive")

    def num_manifolds(self) -> int:
        return 1 if self.family == "one-circle" else 3

    def cluster_counts(self) -> tuple[int, ...]:
        ppc = self.points_per_cluster
        m = self.num_manifolds()
        if ppc is None:
            if self.family == "three-circles":
                return THREE_CIRCLES_COUNTS
            return (_DEFAULT_COUNT,) * m
        if isinstance(ppc, (int, np.integer)):
            return (int(ppc),) * m
        counts = tuple(int(c) for c in ppc)
        if len(counts) != m:
            raise ValueError(f"{self.family} needs {m} cluster counts, got {len(counts)}")
        return counts


def _sample_manifolds(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw the planar coordinates, cluster by cluster, uniformly in arc length."""
    counts = spec.cluster_counts()
    blocks = []
    if spec.family == "three-lines":
        for y, m in zip(_LINE_YS, counts):
            x = _LINE_LENGTH * rng.random(m)
            blocks.append(np.column_stack([x, np.full(m, y)]))
    elif spec.family == "three-moons":
        for (arc, m) in zip(_MOON_ARCS, counts):
            (cx, cy), radius, t0, t1 = arc
            theta = t0 + (t1 - t0) * rng.random(m)
            blocks.append(np.column_stack([cx + radius * np.cos(theta),
                                           cy + radius * np.sin(theta)]))
    else:
        radii = _CIRCLE_RADII if spec.family == "three-circles" else (1.0,)
        for radius, m in zip(radii, counts):
            theta = 2.0 * math.pi * rng.random(m)
            blocks.append(np.column_stack([radius * np.cos(theta),
                                           radius * np.sin(theta)]))
    return np.vstack(blocks)


def generate(spec: SyntheticSpec) -> Dataset:
    """Generate a labeled synthetic dataset. Deterministic given spec.seed."""
    rng = np.random.default_rng(spec.seed)
    counts = spec.cluster_counts()
    xy = _sample_manifolds(spec, rng)
    n = xy.shape[0]
    points = np.zeros((n, spec.ambient_dim))
    points[:, :2] = xy
    if spec.noise_sigma > 0:
        points += rng.normal(0.0, spec.noise_sigma, size=points.shape)
    labels = np.repeat(np.arange(len(counts)), counts)
    return Dataset(points=points, labels=labels, name=spec.family)


def _split_fields(line: str) -> list[str]:
    if "," in line:
        return [f.strip() for f in line.split(",")]
    return line.split()


def _is_numeric_row(fields: Sequence[str]) -> bool:
    for f in fields:
        try:
            float(f)
            return True
        except ValueError:
            continue
    return False


def load_csv(path, label_column: Union[int, str, None] = None) -> Dataset:
    """Load a rectangular numeric table; one point per row.

    label_column selects a column (index or header name) holding cluster ids;
    arbitrary label values are remapped onto 0..L-1. A first row with no
    numeric field at all is treated as a header.
    """
    path = Path(path)
    raw = path.read_text().splitlines()
    rows = [(i + 1, _split_fields(line)) for i, line in enumerate(raw) if line.strip()]
    if not rows:
        raise ValueError(f"{path}: empty file")

    header = None
    if not _is_numeric_row(rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header only, no data rows")

    width = len(rows[0][1])
    for lineno, fields in rows:
        if len(fields) != width:
            raise ValueError(
                f"{path}: row {lineno}: expected {width} fields, found {len(fields)}")

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None or label_column not in header:
                raise ValueError(f"{path}: no header column named {label_column!r}")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if label_idx < 0:
                label_idx += width
            if not 0 <= label_idx < width:
                raise ValueError(f"{path}: label column {label_column} out of range")

    coord_cols = [j for j in range(width) if j != label_idx]
    if not coord_cols:
        raise ValueError(f"{path}: no coordinate columns left after label column")

    points = np.empty((len(rows), len(coord_cols)))
    raw_labels = []
    for r, (lineno, fields) in enumerate(rows):
        for c, j in enumerate(coord_cols):
            try:
                points[r, c] = float(fields[j])
            except ValueError:
                raise ValueError(
                    f"{path}: row {lineno}: non-numeric field {fields[j]!r} "
                    f"in column {j}") from None
        if label_idx is not None:
            raw_labels.append(fields[label_idx])

    labels = None
    if label_idx is not None:
        _, labels = np.unique(np.asarray(raw_labels), return_inverse=True)
    return Dataset(points=points, labels=labels, name=path.stem)


def save_csv(data: Dataset, path, include_labels: bool = True, header: bool = True) -> None:
    """Write points (and labels, if any) as CSV at full float64 precision."""
    path = Path(path)
    with_labels = include_labels and data.labels is not None
    lines = []
    if header:
        cols = [f"x{j}" for j in range(data.dim)]
        if with_labels:
            cols.append("label")
        lines.append(",".join(cols))
    for i in range(data.n):
        fields = [format(v, ".17g") for v in data.points[i]]
        if with_labels:
            fields.append(str(int(data.labels[i])))
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


def descriptor(data: Dataset, spec: Optional[SyntheticSpec] = None) -> dict:
    """Summary record emitted next to generated data files."""
    info = {
        "name": data.name,
        "n": data.n,
        "dim": data.dim,
        "num_clusters": data.num_clusters,
        "cluster_sizes": data.cluster_sizes(),
    }
    if spec is not None:
        info["provenance"] = {
            "family": spec.family,
            "points_per_cluster": list(spec.cluster_counts()),
            "ambient_dim": spec.ambient_dim,
            "noise_sigma": spec.noise_sigma,
            "seed": spec.seed,
        }
    return info


def write_descriptor(data: Dataset, path, spec: Optional[SyntheticSpec] = None) -> dict:
    info = descriptor(data, spec)
    Path(path).write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return info
