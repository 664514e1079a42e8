"""Splitting streams into windows: m-length subsequences and clock bins."""
from __future__ import annotations

import datetime as _dt
from collections import Counter
from typing import Sequence
from zoneinfo import ZoneInfo

from ..aggregate import Centroid, centroid
from ..ingest import LogStream, Schema

ID_SEP = "|"


def subsequences(stream: LogStream, m: int) -> list[list]:
    """Consecutive non-overlapping m-entry windows; a short tail is dropped."""
    if m < 1:
        raise ValueError("m must be >= 1")
    entries = list(stream)
    if len(entries) < m:
        raise ValueError(f"stream of {len(entries)} entries is shorter than m={m}")
    return [entries[i:i + m] for i in range(0, len(entries) - m + 1, m)]


def _bin_key(t: float, tz, unit: str) -> str:
    local = _dt.datetime.fromtimestamp(t, tz)
    if unit == "hour":
        return local.strftime("%Y-%m-%dT%H")
    if unit == "day":
        return local.strftime("%Y-%m-%d")
    raise ValueError(f"unknown bin unit {unit!r}")


def clock_bins(stream: LogStream, unit: str = "hour", timezone: str = "UTC") -> dict:
    """Entries grouped into local wall-clock hours or days; empty bins absent."""
    tz = ZoneInfo(timezone)
    bins: dict = {}
    for entry in stream:
        bins.setdefault(_bin_key(entry.time, tz, unit), []).append(entry)
    return bins


def binned_centroids(streams: Sequence[LogStream], schema: Schema, unit: str = "hour",
                     timezone: str = "UTC") -> tuple[list[str], list[Centroid]]:
    """One centroid per (host, clock bin); ids are ``host|bin``."""
    ids, cents = [], []
    for stream in streams:
        for key, entries in sorted(clock_bins(stream, unit, timezone).items()):
            ids.append(f"{stream.host}{ID_SEP}{key}")
            cents.append(centroid(entries, schema))
    return ids, cents


def split_id(item_id: str) -> tuple[str, str]:
    host, _, rest = str(item_id).rpartition(ID_SEP)
    return host, rest


def hour_histogram(ids: Sequence[str], labels: Sequence[int]) -> list[tuple]:
    """Rows ``(host, hour_of_day, label, count)`` from ``host|YYYY-MM-DDTHH`` ids,
    counting how many days each host's hour fell into each cluster."""
    counts: Counter = Counter()
    for item_id, label in zip(ids, labels):
        host, stamp = split_id(item_id)
        hour = int(stamp.rsplit("T", 1)[1])
        counts[(host, hour, int(label))] += 1
    return [(h, hr, lab, c) for (h, hr, lab), c in sorted(counts.items())]
