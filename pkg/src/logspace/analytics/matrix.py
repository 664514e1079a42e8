from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..ingest import Schema
from ..metrics import cross_distances


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of pairwise distances with item ids."""

    values: np.ndarray
    ids: list

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("distance matrix must be square")
        if self.ids is None:
            self.ids = [str(i) for i in range(v.shape[0])]
        if len(self.ids) != v.shape[0]:
            raise ValueError("one id per row required")
        if not np.allclose(v, v.T, atol=1e-9, rtol=0):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.abs(np.diag(v)) > 1e-9) or np.any(v < -1e-12):
            raise ValueError("distance matrix needs a zero diagonal and nonnegative entries")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_matrix(items: Sequence, schema: Schema, metric: str = "entry",
                    ids: Sequence | None = None) -> DistanceMatrix:
    """Pairwise distances of ``items``.

    ``metric`` is ``"entry"`` (entries or centroids under the entry metric;
    ``"centroid"`` is accepted as an alias) or ``"stream"`` (equal-length
    entry sequences under the mean positional entry distance).
    """
    items = list(items)
    if len(items) < 2:
        raise ValueError("need at least two items")
    if metric in ("entry", "centroid"):
        values = cross_distances(items, items, schema)
    elif metric == "stream":
        m = len(items[0])
        if any(len(x) != m for x in items):
            raise ValueError("stream items must share one length")
        values = np.zeros((len(items), len(items)))
        for pos in range(m):
            column = [x[pos] for x in items]
            values += cross_distances(column, column, schema)
        values /= m
    else:
        raise ValueError(f"unknown metric {metric!r}")
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(values, list(ids) if ids is not None else None)
