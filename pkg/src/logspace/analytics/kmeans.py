"""k-means under the entry metric, with seeding and elbow scan."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..aggregate import Centroid, as_centroid, centroid
from ..ingest import Schema
from ..metrics import Encoded, cross_distances

SEED_EPS = 1e-12


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    centroids: list | None = None
    wcss: float = 0.0
    wcss_trace: list = field(default_factory=list)
    n_iter: int = 0


def _seed(enc: Encoded, items, k: int, rng, law: str) -> list[int]:
    chosen = [int(rng.integers(enc.n))]
    dmin = cross_distances(enc, Encoded([items[chosen[0]]], enc.schema))[:, 0]
    while len(chosen) < k:
        free = np.ones(enc.n, dtype=bool)
        free[chosen] = False
        if law == "inverse":
            w = 1.0 / (SEED_EPS + dmin)
        elif law == "kmeans++":
            w = dmin ** 2
        else:
            raise ValueError(f"unknown seeding law {law!r}")
        w = np.where(free, w, 0.0)
        if w.sum() <= 0:
            w = free.astype(float)
        nxt = int(rng.choice(enc.n, p=w / w.sum()))
        chosen.append(nxt)
        d = cross_distances(enc, Encoded([items[nxt]], enc.schema))[:, 0]
        dmin = np.minimum(dmin, d)
    return chosen


def kmeans(items: Sequence, schema: Schema, k: int, seed: int = 0,
           max_iter: int = 100, seeding: str = "inverse",
           init: Sequence[int] | None = None) -> ClusterAssignment:
    """Lloyd iterations with nearest-centroid assignment under the entry metric.

    ``seeding="inverse"`` draws each further seed with probability inversely
    proportional to its distance from the nearest chosen seed;
    ``"kmeans++"`` uses the usual squared-distance law. ``init`` fixes the
    seed item indices instead.

    The mean of one-hot vectors need not minimise squared total variation, so
    a cluster keeps its previous centroid whenever the new mean would raise
    that cluster's cost; this keeps the WCSS trace nonincreasing.
    """
    items = [as_centroid(x) for x in items]
    n = len(items)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    enc = Encoded(items, schema)
    rng = np.random.default_rng(seed)
    seeds = list(init) if init is not None else _seed(enc, items, k, rng, seeding)
    if len(seeds) != k:
        raise ValueError("init must name exactly k items")
    return _lloyd(items, enc, schema, [items[i] for i in seeds], max_iter)


def _lloyd(items, enc: Encoded, schema: Schema, centroids: list,
           max_iter: int) -> ClusterAssignment:
    n, k = len(items), len(centroids)
    labels = np.full(n, -1)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = cross_distances(enc, Encoded(centroids, schema))
        new = np.argmin(dist, axis=1)
        if _fill_empty(new, dist, centroids, items, k):
            dist = cross_distances(enc, Encoded(centroids, schema))
        trace.append(float((dist[np.arange(n), new] ** 2).sum()))
        if np.array_equal(new, labels):
            break
        labels = new
        candidates = [centroid([items[i] for i in np.flatnonzero(labels == c)], schema)
                      for c in range(k)]
        d_new = cross_distances(enc, Encoded(candidates, schema))[np.arange(n), labels] ** 2
        d_old = dist[np.arange(n), labels] ** 2
        new_cost = np.bincount(labels, weights=d_new, minlength=k)
        old_cost = np.bincount(labels, weights=d_old, minlength=k)
        for c in range(k):
            if new_cost[c] <= old_cost[c]:
                centroids[c] = candidates[c]
    else:
        dist = cross_distances(enc, Encoded(centroids, schema))
        trace.append(float((dist[np.arange(n), labels] ** 2).sum()))
    return ClusterAssignment(labels, centroids, trace[-1], trace, it)


def _fill_empty(labels, dist, centroids, items, k):
    """Re-seed each empty cluster at the point farthest from its centroid."""
    changed = False
    for c in range(k):
        if np.any(labels == c):
            continue
        sizes = np.bincount(labels, minlength=k)
        own = dist[np.arange(len(labels)), labels]
        own = np.where(sizes[labels] > 1, own, -np.inf)
        far = int(np.argmax(own))
        labels[far] = c
        centroids[c] = items[far]
        changed = True
    return changed


def elbow(items: Sequence, schema: Schema, k_range=range(2, 11), seed: int = 0,
          restarts: int = 5, seeding: str = "inverse") -> list[tuple[int, float]]:
    """Best-of-``restarts`` WCSS for each k.

    For every k after the first, one of the restarts is warm-started from the
    previous k's best centroids plus the worst-fit item, so the curve cannot
    rise with k.
    """
    items = [as_centroid(x) for x in items]
    rng = np.random.default_rng(seed)
    out = []
    best_prev = None
    for k in k_range:
        if k > len(items):
            raise ValueError(f"k={k} exceeds the number of items")
        runs = []
        for r in range(restarts):
            if r == 0 and best_prev is not None and best_prev.centroids is not None \
                    and len(best_prev.centroids) == k - 1:
                runs.append(_warm_start(items, schema, best_prev, k))
            else:
                runs.append(kmeans(items, schema, k, seed=int(rng.integers(2**32)),
                                   seeding=seeding))
        best = min(runs, key=lambda a: a.wcss)
        out.append((k, best.wcss))
        best_prev = best
    return out


def _warm_start(items, schema, prev: ClusterAssignment, k: int) -> ClusterAssignment:
    enc = Encoded(items, schema)
    d = cross_distances(enc, Encoded(prev.centroids, schema))
    worst = int(np.argmax(d[np.arange(len(items)), prev.labels]))
    return _lloyd(items, enc, schema, list(prev.centroids) + [items[worst]], 100)
