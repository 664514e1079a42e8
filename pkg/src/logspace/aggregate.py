"""Centroids of entry sets, distance to a centroid, and set variance.

Numerical components average and categorical components average into
category frequencies. Strings have no mean, so a centroid keeps the multiset
of member strings and the distance from a string to it is the mean distance
to the members.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import Domain, LogEntry, Schema
from .metrics import Encoded, cross_distances, d_entry

NULL_LABEL = "<null>"


@dataclass(frozen=True, eq=False)
class Centroid:
    values: tuple
    member_count: int
    approximate: bool = False


def as_centroid(item) -> Centroid:
    if isinstance(item, Centroid):
        return item
    values = tuple((v,) if isinstance(v, str) else v for v in item.values)
    return Centroid(values, 1)


def centroid(items: Sequence, schema: Schema, *, max_strings: int | None = None,
             seed: int = 0) -> Centroid:
    """Average representation of ``items`` (entries or centroids).

    Each item carries equal weight in the numerical and categorical
    components; string multisets are concatenated. With ``max_strings`` the
    multiset is replaced by a uniform sample of that size and the centroid is
    flagged approximate.
    """
    if not len(items):
        raise ValueError("centroid of an empty set")
    items = [as_centroid(x) for x in items]
    for x in items:
        if len(x.values) != len(schema):
            raise ValueError("schema mismatch")
    rng = np.random.default_rng(seed)
    approximate = any(x.approximate for x in items)
    values = []
    for j, attr in enumerate(schema.attributes):
        column = [x.values[j] for x in items]
        if attr.domain is Domain.CATEGORICAL:
            values.append(np.mean(np.asarray(column, dtype=float), axis=0))
        elif attr.domain is Domain.NUMERICAL:
            values.append(float(np.mean(column)))
        else:
            members = tuple(s for multiset in column for s in multiset)
            if max_strings is not None and len(members) > max_strings:
                pick = np.sort(rng.choice(len(members), size=max_strings, replace=False))
                members = tuple(members[i] for i in pick)
                approximate = True
            values.append(members)
    count = sum(x.member_count for x in items)
    return Centroid(tuple(values), count, approximate)


def d_to_centroid(entry, c: Centroid, schema: Schema) -> float:
    """Entry-metric distance with the string term averaged over the multiset."""
    return d_entry(entry, c, schema)


def variance(items: Sequence, schema: Schema) -> float:
    """Mean squared distance of the items to their centroid."""
    if not len(items):
        raise ValueError("variance of an empty set")
    c = centroid(items, schema)
    d = cross_distances(Encoded(list(items), schema), Encoded([c], schema))[:, 0]
    return float(np.mean(d ** 2))


def stream_variance(streams: Sequence, schema: Schema) -> float:
    """Variance of a set of streams, each represented by its entry centroid."""
    return variance([centroid(list(s), schema) for s in streams], schema)


def centroid_to_dict(c: Centroid, schema: Schema, top: int = 10) -> dict:
    """JSON-ready listing: categories as fractions sorted descending."""
    out = {"member_count": c.member_count, "approximate": c.approximate, "attributes": {}}
    for attr, value in zip(schema.attributes, c.values):
        if attr.domain is Domain.CATEGORICAL:
            pairs = [
                (NULL_LABEL if label is None else label, float(p))
                for label, p in zip(attr.vocabulary, value) if p > 0
            ]
            pairs.sort(key=lambda kv: (-kv[1], kv[0]))
            out["attributes"][attr.name] = dict(pairs)
        elif attr.domain is Domain.NUMERICAL:
            out["attributes"][attr.name] = float(value)
        else:
            counts: dict = {}
            for s in value:
                counts[s] = counts.get(s, 0) + 1
            common = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
            out["attributes"][attr.name] = {
                "multiset_size": len(value),
                "most_common": [[s, n] for s, n in common],
            }
    return out


def entry_to_centroid_distances(entries: Sequence[LogEntry], c: Centroid,
                                schema: Schema) -> np.ndarray:
    return cross_distances(entries, [c], schema)[:, 0]
