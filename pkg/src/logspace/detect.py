"""Soft-signature detection.

An observed attack sequence is slid across a host's stream; every window's
summed entry distance is scored against the distances seen so far with a
one-sided Student-t tail probability, and windows whose p-value falls under
a threshold raise an :class:`Alert`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .ingest import LogEntry, LogStream, Schema
from .metrics import cross_distances

DEFAULT_THRESHOLD = 1e-15
DEFAULT_WARMUP = 30


@dataclass(frozen=True, eq=False)
class Signature:
    entries: tuple
    host: str
    start_index: int
    end_index: int

    def __post_init__(self):
        if len(self.entries) < 2:
            raise ValueError("a signature needs at least two entries")

    @property
    def n_sig(self) -> int:
        return len(self.entries)

    @property
    def t_start(self) -> float:
        return self.entries[0].time

    @property
    def t_end(self) -> float:
        return self.entries[-1].time


@dataclass(frozen=True)
class Alert:
    host: str
    window_start_index: int
    window_time: float
    distance: float
    p_value: float


@dataclass(frozen=True)
class DetectorState:
    """Running count, mean and sum of squared deviations (Welford)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    warmup_min: int = DEFAULT_WARMUP
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")

    @property
    def std(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1))

    def push(self, x: float) -> "DetectorState":
        count = self.count + 1
        delta = x - self.mean
        mean = self.mean + delta / count
        m2 = self.m2 + delta * (x - mean)
        return replace(self, count=count, mean=mean, m2=max(m2, 0.0))


def extract_signature(stream: LogStream, start: int, end: int) -> Signature:
    """The slice ``stream[start:end]`` as a signature."""
    if not (0 <= start < end <= len(stream)):
        raise IndexError(f"signature slice [{start}, {end}) outside stream of {len(stream)}")
    if end - start < 2:
        raise ValueError("a signature needs at least two entries")
    return Signature(tuple(stream.entries[start:end]), stream.host, start, end)


def cross_correlate(sig: Signature, test, schema: Schema) -> np.ndarray:
    """Displaced stream distance: for each offset k, the sum over i of
    ``d_entry(sig[i], test[i + k])``; length ``n_test - n_sig + 1``."""
    entries = list(test)
    n_sig, n_test = sig.n_sig, len(entries)
    if n_test < n_sig:
        raise ValueError(f"test stream ({n_test}) shorter than signature ({n_sig})")
    pair = cross_distances(list(sig.entries), entries, schema)
    width = n_test - n_sig + 1
    out = np.zeros(width)
    for i in range(n_sig):
        out += pair[i, i:i + width]
    return out


def t_pvalue(t_star: float, df: float) -> float:
    """Lower-tail probability ``P(T < t_star)`` of Student's t."""
    return float(stats.t.cdf(t_star, df))


def online_pvalue(state: DetectorState, d: float) -> tuple[float, DetectorState]:
    """Score ``d`` against the history including ``d`` itself.

    Returns ``(p, new_state)``; ``p`` is 1 during warm-up or when the history
    has zero spread.
    """
    state = state.push(float(d))
    k = state.count
    s = state.std
    if k < max(state.warmup_min, 2) or s == 0.0:
        return 1.0, state
    t_star = (d - state.mean) / s
    return t_pvalue(t_star, k - 1), state


def scan(sig: Signature, stream: LogStream, schema: Schema,
         warmup_min: int = DEFAULT_WARMUP):
    """Distances, online p-values and a scored mask for every window.

    ``scored[k]`` is False where the p-value is the warm-up / zero-spread
    placeholder 1; such windows never alert.
    """
    distances = cross_correlate(sig, stream, schema)
    state = DetectorState(warmup_min=warmup_min)
    pvalues = np.ones_like(distances)
    scored = np.zeros(distances.shape, dtype=bool)
    for k, d in enumerate(distances):
        pvalues[k], state = online_pvalue(state, d)
        scored[k] = state.count >= max(warmup_min, 2) and state.std > 0.0
    return distances, pvalues, scored


def detect(sig: Signature, stream: LogStream, schema: Schema,
           threshold: float = DEFAULT_THRESHOLD,
           warmup_min: int = DEFAULT_WARMUP) -> list[Alert]:
    """Alerts for every window whose p-value is at most ``threshold``.

    ``window_time`` is the time of the window's last entry, the moment an
    online detector would have seen the whole window.
    """
    DetectorState(warmup_min=warmup_min, threshold=threshold)  # validates
    distances, pvalues, scored = scan(sig, stream, schema, warmup_min)
    alerts = []
    for k in np.flatnonzero(scored & (pvalues <= threshold)):
        entry: LogEntry = stream.entries[k + sig.n_sig - 1]
        alerts.append(Alert(stream.host, int(k), entry.time,
                            float(distances[k]), float(pvalues[k])))
    return alerts
