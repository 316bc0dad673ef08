"""k-nearest neighbors under power-weighted and longest-leg path distances.

The search is a pruned Dijkstra sweep over the implicit complete distance
graph: every settled vertex contributes edges only to its Euclidean nearest
others. Restricting relaxation to those edges provably preserves the k
closest vertices by path distance, so each single-source query costs
O(k^2) heap work plus k + 1 Euclidean k-NN queries instead of touching all
n vertices.

Finite powers accumulate leg lengths additively in the powered domain (legs
are rescaled by the bounding-box diagonal first so large p cannot overflow)
and results are reported as metric values, rooted once at the end. The
infinite case replaces addition with max and needs no rescaling.

Tie handling: path distances equal within a small relative tolerance are
treated as tied and resolve by ascending point index. The pruned sweep
alone cannot guarantee that rule at the k-th boundary, because a tied
vertex may only be reachable through edges the pruning dropped. Longest-leg
distances tie generically (many targets share one bottleneck leg), so for
p = inf the selection is always re-derived by an exact bounded sweep of the
complete graph; finite powers tie through duplicates, symmetric geometry,
or powered sums absorbing legs below their ulp, and are re-derived when the
sweep surfaces keys tying at or inside the boundary. The reported stats
always describe the pruned sweep.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import cdist

from .euclidean import SpatialIndex
from .metrics import check_power

# Full pairwise-distance reuse for the exact tie pass, per dataset.
_DENSE_ROWS_MAX_N = 2500

# Distances this close (relatively) count as tied; two exact algorithms can
# disagree by an ulp on the same value, so ties must span that fuzz.
TIE_REL_TOL = 1e-12


def select_k_ranked(indices, values, k: int, rel_tol: float = TIE_REL_TOL):
    """The k lowest (value, index) pairs under the tolerance-grouped tie rule.

    Values whose adjacent gaps stay within rel_tol form one tie group; a
    group straddling the k-th slot is filled by its lowest indices. The
    chosen entries come back ordered by (value, index).
    """
    indices = np.asarray(indices, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    order = np.lexsort((indices, values))
    idx, val = indices[order], values[order]
    starts = [0]
    for i in range(1, len(val)):
        if val[i] - val[i - 1] > rel_tol * val[i]:
            starts.append(i)
    starts.append(len(val))
    chosen = []
    for g in range(len(starts) - 1):
        lo, hi = starts[g], starts[g + 1]
        room = k - len(chosen)
        if room <= 0:
            break
        members = sorted(range(lo, hi), key=lambda i: idx[i])[:room]
        chosen.extend(members)
    chosen = sorted(chosen)  # back to (value, index) order
    return idx[chosen], val[chosen]


@dataclass
class SearchStats:
    """Per-source instrumentation of one pruned sweep.

    knn_queries counts neighbor-set requests including the seed query;
    repeated requests for the same vertex hit the per-run memo and are still
    counted, so a run always records exactly k + 1 of them.
    """

    knn_queries: int = 0
    knn_cache_misses: int = 0
    relax_calls: int = 0
    max_queue_size: int = 0
    tie_refined: bool = False


@dataclass
class PathNeighborResult:
    """The k path-nearest vertices of one source, ascending by distance.

    When the source entry is included (the default) it comes first at
    distance zero and counts toward k.
    """

    source: int
    indices: np.ndarray
    distances: np.ndarray
    p: float
    stats: SearchStats = field(default_factory=SearchStats)

    def __len__(self) -> int:
        return len(self.indices)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(d)) for i, d in zip(self.indices, self.distances)]


def _check_args(n: int, source: int, k: int) -> None:
    if n < 2:
        raise ValueError("path k-NN needs at least 2 points")
    if not 0 <= source < n:
        raise ValueError(f"source index {source} out of range for {n} points")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} invalid: need 1 <= k <= n with n={n} "
                         "(the source counts as one of its own k neighbors)")


def _search(source: int, k: int, finite: bool, get_neighbors, stats: SearchStats):
    """Pruned sweep settling exactly k vertices (source included).

    get_neighbors(u) yields (indices, edge_keys) for the k-1 Euclidean
    nearest others of u, edge keys already in the accumulation domain.
    Equal keys pop in discovery order, so expansion inside a plateau of
    exactly tied path distances stays breadth-first around the source.
    Returns the settled vertices, their keys, and the live frontier map.
    """
    heap: list[tuple[float, int, int]] = [(0.0, 0, source)]
    best = {source: 0.0}
    settled: set[int] = set()
    out_idx: list[int] = []
    out_key: list[float] = []
    counter = 1
    get_neighbors(source)  # seed query; the convention puts the source in its own neighbor set
    stats.max_queue_size = 1
    for _ in range(k):
        while True:
            key, _, u = heapq.heappop(heap)
            if u not in settled:
                break
            # stale duplicate left behind by a later, smaller insert
        settled.add(u)
        out_idx.append(u)
        out_key.append(key)
        nbr_idx, nbr_key = get_neighbors(u)
        for v, w in zip(nbr_idx, nbr_key):
            stats.relax_calls += 1
            if v in settled:
                continue
            tentative = key + w if finite else (key if key >= w else w)
            known = best.get(v)
            if known is None or tentative < known:
                best[v] = tentative
                heapq.heappush(heap, (tentative, counter, v))
                counter += 1
        if len(heap) > stats.max_queue_size:
            stats.max_queue_size = len(heap)
    frontier = {v: b for v, b in best.items() if v not in settled}
    return out_idx, out_key, frontier


def _visible_tie(out_key: list[float], frontier: dict[int, float],
                 rel_tol: float) -> bool:
    """Keys tying inside the selection or at the boundary, within tolerance.

    Comparison is tolerant because keys live in the powered domain: the final
    p-th root compresses relative differences p-fold, so keys a few ulps
    apart can round to bitwise-equal metric distances.
    """
    for a, b in zip(out_key, out_key[1:]):
        if b - a <= rel_tol * b:
            return True
    kappa = out_key[-1]
    return any(b - kappa <= rel_tol * kappa for b in frontier.values())


def _exact_sweep(points: np.ndarray, source: int, k: int, p: float,
                 finite: bool, scale: float,
                 row_getter: Optional[Callable[[int], np.ndarray]] = None):
    """Bounded single-source sweep of the complete graph; oracle-exact.

    Vertices settle in (key, index) order with full-row relaxation until the
    key passes the k-th settled value, so everything tying the boundary is
    on the table; the k lowest (distance, index) pairs are then selected in
    the rooted metric domain, where sums that differ only in association
    order collapse to equal floats and the index rule decides, exactly as in
    the dense oracle. Cost O(s n) for s settled vertices; returns metric
    values.
    """
    n = points.shape[0]

    def rows(u: int) -> np.ndarray:
        if row_getter is not None:
            return row_getter(u)
        return cdist(points[u:u + 1], points)[0]

    live = np.full(n, math.inf)
    live[source] = 0.0
    done = np.zeros(n, dtype=bool)
    settled: list[int] = []
    values: list[float] = []
    horizon = None
    while True:
        u = int(live.argmin())  # ties resolve to the lowest index
        val = live[u]
        if not math.isfinite(val):
            break
        if horizon is not None and val > horizon:
            break
        done[u] = True
        live[u] = math.inf
        settled.append(u)
        values.append(val)
        if len(settled) == k and horizon is None:
            # overscan tolerance covers powered sums that the final root
            # would collapse into the boundary tie group; a metric-domain
            # tie of TIE_REL_TOL widens p-fold before rooting
            widen = 4.0 * TIE_REL_TOL * (p if finite else 1.0)
            horizon = val * (1.0 + widen)
        if done.all():
            break
        row = rows(u)
        if finite:
            cand = val + (row / scale) ** p
        else:
            cand = np.maximum(val, row)
        cand[done] = math.inf
        np.minimum(live, cand, out=live)
    metric = np.asarray(values)
    if finite:
        metric = scale * metric ** (1.0 / p)
    sel, vals = select_k_ranked(settled, metric, k)
    return sel.tolist(), vals.tolist()


def _finish(source: int, p: float, finite: bool, scale: float,
            out_idx, out_key, include_source: bool, stats: SearchStats,
            metric_domain: bool = False) -> PathNeighborResult:
    indices = np.asarray(out_idx, dtype=np.int64)
    keys = np.asarray(out_key)
    if metric_domain or not finite:
        distances = keys
    else:
        distances = scale * keys ** (1.0 / p)
    if not include_source:
        indices, distances = indices[1:], distances[1:]
    return PathNeighborResult(source=source, indices=indices,
                              distances=distances, p=p, stats=stats)


def _resolve(points, source, k, p, finite, scale, out_idx, out_key, frontier,
             stats, row_getter=None):
    """Re-derive the selection exactly when ties could sway it; returns
    (indices, values, metric_domain)."""
    tie_tol = 4.0 * TIE_REL_TOL * (p if finite else 1.0)
    if (not finite) or _visible_tie(out_key, frontier, tie_tol):
        out_idx, out_key = _exact_sweep(points, source, k, p, finite, scale,
                                        row_getter)
        stats.tie_refined = True
        return out_idx, out_key, True
    return out_idx, out_key, False


def path_knn(index: SpatialIndex, source: int, k: int, p,
             include_source: bool = True,
             refine_ties: bool = True) -> PathNeighborResult:
    """The k nearest points to source under the power-p path distance.

    Exact: equals the brute-force all-pairs oracle restricted to the source
    row, including its lowest-index-wins tie rule. Euclidean neighbor sets
    are fetched lazily from the index and memoized for this call only.
    include_source=False drops the leading (source, 0) entry.

    refine_ties=False skips the exact tie pass and keeps the pruned sweep's
    own selection, which resolves equal path distances in favor of vertices
    discovered first (spatially coherent rather than lowest-index). Distances
    are identical either way; only the choice among exactly tied neighbors
    differs. Similarity graphs are built in that mode.
    """
    p = check_power(p)
    _check_args(index.n, source, k)
    finite = math.isfinite(p)
    scale = index.diameter_bound()
    if scale == 0.0:
        scale = 1.0
    stats = SearchStats()
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def get_neighbors(u: int):
        stats.knn_queries += 1
        hit = cache.get(u)
        if hit is not None:
            return hit
        stats.knn_cache_misses += 1
        nl = index.knn(u, k - 1)
        keys = (nl.distances / scale) ** p if finite else nl.distances
        cache[u] = (nl.indices, keys)
        return cache[u]

    out_idx, out_key, frontier = _search(source, k, finite, get_neighbors, stats)
    metric_domain = False
    if refine_ties:
        out_idx, out_key, metric_domain = _resolve(
            index.points, source, k, p, finite, scale, out_idx, out_key,
            frontier, stats)
    return _finish(source, p, finite, scale, out_idx, out_key, include_source,
                   stats, metric_domain)


def path_knn_all(index: SpatialIndex, k: int, p,
                 include_source: bool = True,
                 refine_ties: bool = True) -> list[PathNeighborResult]:
    """path_knn for every source, ordered by source index.

    The Euclidean neighbor table is built once with a single batched tree
    query; each per-source sweep then reads that shared immutable table, so
    output is identical to looping path_knn while the Euclidean query cost
    drops from n(k+1) individual lookups to one vectorized pass.
    """
    p = check_power(p)
    _check_args(index.n, 0, k)
    finite = math.isfinite(p)
    scale = index.diameter_bound()
    if scale == 0.0:
        scale = 1.0
    nbr_idx, nbr_dist = index.batch_knn(k - 1)
    nbr_key = (nbr_dist / scale) ** p if finite else nbr_dist

    row_getter = None
    if refine_ties and not finite and index.n <= _DENSE_ROWS_MAX_N:
        dense = cdist(index.points, index.points)
        row_getter = lambda u: dense[u]  # noqa: E731

    results = []
    for source in range(index.n):
        stats = SearchStats()

        def get_neighbors(u: int, _stats=stats):
            _stats.knn_queries += 1
            return nbr_idx[u], nbr_key[u]

        out_idx, out_key, frontier = _search(source, k, finite, get_neighbors,
                                             stats)
        metric_domain = False
        if refine_ties:
            out_idx, out_key, metric_domain = _resolve(
                index.points, source, k, p, finite, scale, out_idx, out_key,
                frontier, stats, row_getter)
        results.append(_finish(source, p, finite, scale, out_idx, out_key,
                               include_source, stats, metric_domain))
    return results
