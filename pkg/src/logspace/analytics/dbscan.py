from __future__ import annotations

from collections import deque

import numpy as np

from .kmeans import ClusterAssignment
from .matrix import DistanceMatrix

NOISE = -1


def dbscan(dm: DistanceMatrix, eps: float, min_pts: int) -> ClusterAssignment:
    """Density clustering over a precomputed matrix.

    The eps-neighbourhood (``d <= eps``) includes the point itself. Clusters
    are numbered in the order their lowest-index core point is reached, and a
    border point belongs to the first cluster that reaches it; noise is -1.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    n = dm.n
    neighbours = [np.flatnonzero(dm.values[i] <= eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbours])
    labels = np.full(n, NOISE)
    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            if not core[p]:
                continue
            for q in neighbours[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    queue.append(q)
        cluster += 1
    return ClusterAssignment(labels)


def default_eps(dm: DistanceMatrix, k: int = 4) -> float:
    """Heuristic eps: median distance to the k-th nearest other point."""
    if dm.n <= k:
        raise ValueError(f"need more than {k} points")
    ordered = np.sort(dm.values, axis=1)
    return float(np.median(ordered[:, k]))
