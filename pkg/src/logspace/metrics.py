"""Attribute, entry and stream metrics.

Scalar functions (:func:`d_entry` and friends) are the readable reference.
Bulk work goes through :func:`cross_distances`, which encodes items into
arrays once and evaluates every pair together; items may be entries or
centroids (anything with a ``values`` tuple, where a string slot holds either
a ``str`` or a tuple of member strings).
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Sequence

import numpy as np

from . import _kernels
from .ingest import Domain, LogEntry, LogStream, Schema

lev = _kernels.lev
d_string = _kernels.nlev


def d_categorical(u, v) -> float:
    """Total variation ``||u - v||_1 / 2`` between probability vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return 0.5 * float(np.abs(u - v).sum())


def d_numerical(x: float, y: float, x_min: float, x_max: float) -> float:
    """``|x - y| / (x_max - x_min + 1)``, clamped to 1 outside the fitted range."""
    return min(1.0, abs(x - y) / (x_max - x_min + 1.0))


def _strings(value) -> tuple:
    return (value,) if isinstance(value, str) else tuple(value)


def d_multiset(a, b) -> float:
    """Mean :func:`d_string` over all member pairs of two string multisets.

    A plain ``str`` counts as a one-member multiset, so for two strings this
    is :func:`d_string` itself.
    """
    xs, ys = _strings(a), _strings(b)
    if len(xs) == 1 and len(ys) == 1:
        return d_string(xs[0], ys[0])
    return float(_kernels.nlev_matrix(list(xs), list(ys)).mean())


def attribute_distance(attr, a, b) -> float:
    if attr.domain is Domain.CATEGORICAL:
        return d_categorical(a, b)
    if attr.domain is Domain.NUMERICAL:
        return d_numerical(a, b, attr.x_min, attr.x_max)
    return d_multiset(a, b)


def _check(item, schema: Schema):
    if len(item.values) != len(schema):
        raise ValueError(
            f"schema mismatch: item has {len(item.values)} values, schema has {len(schema)}"
        )


def d_entry(e1, e2, schema: Schema) -> float:
    """l2 combination of the per-attribute distances; time is not included."""
    _check(e1, schema)
    _check(e2, schema)
    total = 0.0
    for attr, a, b in zip(schema.attributes, e1.values, e2.values):
        total += attribute_distance(attr, a, b) ** 2
    return float(np.sqrt(total))


def d_stream_seq(f: Sequence[LogEntry], g: Sequence[LogEntry], schema: Schema) -> float:
    """Mean positional entry distance of two equal-length sequences."""
    if len(f) != len(g):
        raise ValueError(f"length mismatch: {len(f)} vs {len(g)}")
    if not len(f):
        raise ValueError("empty sequences")
    return sum(d_entry(a, b, schema) for a, b in zip(f, g)) / len(f)


def interpolate_entry(stream: LogStream, s: float, schema: Schema) -> LogEntry:
    """Value of the stream at time ``s`` by convex combination of its neighbours.

    Strings cannot be mixed, so the string of the nearer entry is used (the
    earlier one at the exact midpoint).
    """
    times = [e.time for e in stream.entries]
    if not times or s < times[0] or s > times[-1]:
        raise ValueError(f"time {s} outside stream span")
    j = bisect_left(times, s)
    if times[j] == s:
        hit = stream.entries[j]
        return LogEntry(float(s), hit.values)
    lo, hi = stream.entries[j - 1], stream.entries[j]
    w = (s - lo.time) / (hi.time - lo.time)
    values = []
    for attr, a, b in zip(schema.attributes, lo.values, hi.values):
        if attr.domain is Domain.STRING:
            values.append(a if w <= 0.5 else b)
        elif attr.domain is Domain.CATEGORICAL:
            values.append((1.0 - w) * np.asarray(a) + w * np.asarray(b))
        else:
            values.append((1.0 - w) * a + w * b)
    return LogEntry(float(s), tuple(values))


def d_stream_time(f: LogStream, g: LogStream, schema: Schema, k: int = 100) -> float:
    """Time-aware stream distance: mean entry distance on a uniform k-point
    grid over the overlap of the two streams' time spans."""
    if k < 2:
        raise ValueError("grid size k must be >= 2")
    if not len(f) or not len(g):
        raise ValueError("empty stream")
    lo = max(f.entries[0].time, g.entries[0].time)
    hi = min(f.entries[-1].time, g.entries[-1].time)
    if lo > hi:
        raise ValueError("streams have disjoint time spans")
    grid = np.linspace(lo, hi, k)
    return float(np.mean([
        d_entry(interpolate_entry(f, u, schema), interpolate_entry(g, u, schema), schema)
        for u in grid
    ]))


# -- vectorized path -------------------------------------------------------------

class Encoded:
    """Array form of a list of items under one schema."""

    def __init__(self, items: Sequence, schema: Schema):
        for item in items:
            _check(item, schema)
        self.schema = schema
        self.n = len(items)
        self.cats = []
        self.nums = []
        self.strs = []
        for j, attr in enumerate(schema.attributes):
            column = [item.values[j] for item in items]
            if attr.domain is Domain.CATEGORICAL:
                block = np.zeros((self.n, attr.dim))
                for i, v in enumerate(column):
                    v = np.asarray(v, dtype=float)
                    if v.shape != (attr.dim,):
                        raise ValueError(f"{attr.name}: dimension mismatch")
                    block[i] = v
                self.cats.append(block)
            elif attr.domain is Domain.NUMERICAL:
                self.nums.append((np.asarray(column, dtype=float), attr.denominator))
            else:
                self.strs.append(_StringColumn(column))


class _StringColumn:
    """Multisets as a weight matrix over the column's distinct strings, so the
    mean pairwise distance between two multisets is ``W_a @ L @ W_b.T``."""

    def __init__(self, column):
        self.unique = []
        index = {}
        rows, cols, weights = [], [], []
        for i, value in enumerate(column):
            members = _strings(value)
            for s in members:
                if s not in index:
                    index[s] = len(self.unique)
                    self.unique.append(s)
                rows.append(i)
                cols.append(index[s])
                weights.append(1.0 / len(members))
        self.weights = np.zeros((len(column), len(self.unique)))
        np.add.at(self.weights, (rows, cols), weights)
        self.singletons = all(isinstance(v, str) for v in column)
        self.codes = np.array([index[v] for v in column]) if self.singletons else None


def _string_block(a: _StringColumn, b: _StringColumn) -> np.ndarray:
    table = _kernels.nlev_matrix(a.unique, b.unique)
    if a.singletons and b.singletons:
        return table[np.ix_(a.codes, b.codes)]
    return a.weights @ table @ b.weights.T


def cross_distances(a, b, schema: Schema | None = None) -> np.ndarray:
    """Matrix of entry-metric distances between two item collections.

    ``a`` and ``b`` are item lists or :class:`Encoded` blocks. For
    singleton-string items this equals :func:`d_entry` element-wise.
    """
    if not isinstance(a, Encoded):
        a = Encoded(a, schema)
    if not isinstance(b, Encoded):
        b = Encoded(b, schema if schema is not None else a.schema)
    sq = np.zeros((a.n, b.n))
    for ca, cb in zip(a.cats, b.cats):
        # loop over the shorter side keeps memory at O(n * dim)
        if a.n <= b.n:
            for i in range(a.n):
                sq[i] += (0.5 * np.abs(cb - ca[i]).sum(axis=1)) ** 2
        else:
            for j in range(b.n):
                sq[:, j] += (0.5 * np.abs(ca - cb[j]).sum(axis=1)) ** 2
    for (xa, den), (xb, _) in zip(a.nums, b.nums):
        sq += np.minimum(1.0, np.abs(xa[:, None] - xb[None, :]) / den) ** 2
    for sa, sb in zip(a.strs, b.strs):
        sq += _string_block(sa, sb) ** 2
    return np.sqrt(sq)
