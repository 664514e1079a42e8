"""Turning raw, nested log documents into standardized entries and streams.

The pipeline is: :func:`flatten` a document, fit a :class:`Schema` over the
flattened corpus (:func:`fit_schema_stats`), then :func:`standardize` every
record into a :class:`LogEntry` and group entries into per-host
:class:`LogStream` objects with :func:`build_streams`.
"""
from __future__ import annotations

import datetime as _dt
import math
import ntpath
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import RecordRejected, SchemaError

SEPARATOR = "."
DERIVATIONS = ("basename", "extension")


class Pairs(list):
    """Ordered ``(key, value)`` pairs of one JSON object, duplicates kept."""


class Domain(str, Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"
    STRING = "string"


@dataclass(frozen=True)
class RawLog:
    """A raw document, possibly nested.

    ``document`` is a mapping or a :class:`Pairs` list; the latter keeps
    duplicate keys that a plain dict would silently merge.
    """

    document: Any
    source_host: str | None = None
    raw_time: Any = None


@dataclass(frozen=True)
class FlatLog:
    pairs: dict
    source_host: str | None = None
    raw_time: Any = None


@dataclass(frozen=True)
class Attribute:
    """One column of the relation schema.

    Numerical attributes carry the fitted range ``x_min``/``x_max``;
    categorical attributes carry a vocabulary whose slot 0 (``None``) is the
    null category.
    """

    name: str
    domain: Domain
    source_key: str
    derivation: str | None = None
    x_min: float | None = None
    x_max: float | None = None
    vocabulary: tuple = (None,)
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        if self.derivation is not None and self.derivation not in DERIVATIONS:
            raise SchemaError(f"{self.name}: unknown derivation {self.derivation!r}")
        if self.domain is Domain.NUMERICAL and self.x_min is not None:
            if self.x_max is None or self.x_min > self.x_max:
                raise SchemaError(f"{self.name}: need x_min <= x_max")
        vocab = tuple(self.vocabulary)
        if not vocab or vocab[0] is not None:
            raise SchemaError(f"{self.name}: vocabulary must start with the null slot")
        object.__setattr__(self, "vocabulary", vocab)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(vocab)})

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    @property
    def denominator(self) -> float:
        return self.x_max - self.x_min + 1.0

    @property
    def fitted(self) -> bool:
        if self.domain is Domain.NUMERICAL:
            return self.x_min is not None
        return True

    def category_index(self, label) -> int:
        """Vocabulary slot of ``label``; unseen labels map to the null slot."""
        return self._index.get(label, 0)

    def one_hot(self, label) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.category_index(label)] = 1.0
        return v


@dataclass(frozen=True)
class Schema:
    attributes: tuple
    time_key: str
    host_key: str | None = None

    def __post_init__(self):
        attrs = tuple(self.attributes)
        if not attrs:
            raise SchemaError("schema needs at least one attribute")
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        object.__setattr__(self, "attributes", attrs)

    def __len__(self):
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def fitted(self) -> bool:
        return all(a.fitted for a in self.attributes)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def project(self, keep: Sequence[str]) -> "Schema":
        """Schema restricted to ``keep`` (in schema order)."""
        missing = set(keep) - set(self.names)
        if missing:
            raise SchemaError(f"unknown attributes: {sorted(missing)}")
        return replace(self, attributes=tuple(a for a in self.attributes if a.name in keep))

    def to_dict(self) -> dict:
        out = {"time_key": self.time_key, "host_key": self.host_key, "attributes": []}
        fitted = {}
        for a in self.attributes:
            spec = {"name": a.name, "domain": a.domain.value, "source_key": a.source_key}
            if a.derivation:
                spec["derivation"] = a.derivation
            out["attributes"].append(spec)
            if a.domain is Domain.NUMERICAL and a.x_min is not None:
                fitted[a.name] = {"x_min": a.x_min, "x_max": a.x_max}
            elif a.domain is Domain.CATEGORICAL and len(a.vocabulary) > 1:
                fitted[a.name] = {"vocabulary": list(a.vocabulary)}
        if fitted:
            out["fitted"] = fitted
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Schema":
        try:
            fitted = doc.get("fitted", {}) or {}
            attrs = []
            for spec in doc["attributes"]:
                stats = fitted.get(spec["name"], {})
                vocab = stats.get("vocabulary", [None])
                attrs.append(Attribute(
                    name=spec["name"],
                    domain=Domain(spec["domain"]),
                    source_key=spec.get("source_key", spec["name"]),
                    derivation=spec.get("derivation"),
                    x_min=stats.get("x_min"),
                    x_max=stats.get("x_max"),
                    vocabulary=tuple(vocab),
                ))
            return cls(tuple(attrs), time_key=doc["time_key"], host_key=doc.get("host_key"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"invalid schema document: {exc}") from exc


@dataclass(frozen=True, eq=False)
class LogEntry:
    """``(t, x_1 .. x_N)``: categorical values are probability vectors
    (one-hot after ingestion), numerical values floats, strings ``str``."""

    time: float
    values: tuple


@dataclass(eq=False)
class LogStream:
    host: str
    entries: list

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, item):
        return self.entries[item]

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.entries], dtype=float)


# -- flattening --------------------------------------------------------------

def _items(node):
    if isinstance(node, Mapping):
        return list(node.items())
    if isinstance(node, Pairs):
        return list(node)
    return None


def _join(prefix: str, key: str) -> str:
    if not prefix:
        return key
    if not key:
        return prefix
    return prefix + SEPARATOR + key


def flatten_document(document) -> dict:
    """Depth-first un-nesting; colliding keys get ``_2``, ``_3``, ... appended.

    Plain lists are indexed positionally (``key.0``, ``key.1``, ...).
    """
    out: dict = {}

    def emit(key, value):
        if key in out:
            k = 2
            while f"{key}_{k}" in out:
                k += 1
            key = f"{key}_{k}"
        out[key] = value

    def walk(prefix, node):
        pairs = _items(node)
        if pairs is not None:
            for k, v in pairs:
                walk(_join(prefix, str(k)), v)
        elif isinstance(node, (list, tuple)):
            for i, v in enumerate(node):
                walk(_join(prefix, str(i)), v)
        else:
            emit(prefix, node)

    walk("", document)
    return out


def flatten(raw: RawLog) -> FlatLog:
    return FlatLog(flatten_document(raw.document), raw.source_host, raw.raw_time)


# -- value handling ------------------------------------------------------------

def derive_path_fields(path: str) -> tuple[str, str]:
    """Uppercased ``(basename-without-extension, extension)`` of a path.

    >>> derive_path_fields("C:\\\\Windows\\\\explorer.exe")
    ('EXPLORER', 'EXE')
    """
    base = ntpath.basename(str(path))
    stem, ext = ntpath.splitext(base)
    return stem.upper(), ext[1:].upper()


def parse_time(raw) -> float:
    """UNIX seconds from a number, numeric string, or RFC 3339 string.

    Naive datetimes are taken as UTC.
    """
    if isinstance(raw, bool) or raw is None:
        raise RecordRejected("missing time" if raw is None else "malformed time")
    if isinstance(raw, (int, float)):
        t = float(raw)
    elif isinstance(raw, str):
        text = raw.strip()
        try:
            t = float(text)
        except ValueError:
            if text.endswith(("Z", "z")):
                text = text[:-1] + "+00:00"
            try:
                stamp = _dt.datetime.fromisoformat(text)
            except ValueError:
                raise RecordRejected("malformed time") from None
            if stamp.tzinfo is None:
                stamp = stamp.replace(tzinfo=_dt.timezone.utc)
            t = stamp.timestamp()
    else:
        raise RecordRejected("malformed time")
    if not math.isfinite(t):
        raise RecordRejected("malformed time")
    return t


def _derive(attr: Attribute, raw):
    text = str(raw)
    if attr.derivation == "basename":
        return derive_path_fields(text)[0]
    if attr.derivation == "extension":
        return derive_path_fields(text)[1]
    return raw


def _numeric(attr: Attribute, raw) -> float:
    if isinstance(raw, bool):
        raise RecordRejected(f"non-numeric value for {attr.name}")
    if isinstance(raw, (int, float)):
        x = float(raw)
    elif isinstance(raw, str):
        try:
            x = float(raw)
        except ValueError:
            raise RecordRejected(f"non-numeric value for {attr.name}") from None
    else:
        raise RecordRejected(f"non-numeric value for {attr.name}")
    if not math.isfinite(x):
        raise RecordRejected(f"non-numeric value for {attr.name}")
    return x


def _present(flat: FlatLog, attr: Attribute) -> bool:
    return flat.pairs.get(attr.source_key) is not None


def _typed(attr: Attribute, raw):
    """Derived and type-coerced raw value (categorical labels uppercased)."""
    value = _derive(attr, raw)
    if attr.domain is Domain.NUMERICAL:
        return _numeric(attr, value)
    if attr.domain is Domain.CATEGORICAL:
        return str(value).upper()
    return str(value)


def standardize(flat: FlatLog, schema: Schema) -> LogEntry | None:
    """Standardize one flattened record, or ``None`` if it has no schema key.

    Raises :class:`RecordRejected` for a malformed time or a non-numeric
    value under a numerical attribute.
    """
    if not schema.fitted:
        raise SchemaError("schema statistics are not fitted")
    if not any(_present(flat, a) for a in schema.attributes):
        return None
    t = parse_time(flat.raw_time)
    values = []
    for attr in schema.attributes:
        raw = flat.pairs.get(attr.source_key)
        if attr.domain is Domain.CATEGORICAL:
            label = None if raw is None else _typed(attr, raw)
            values.append(attr.one_hot(label))
        elif attr.domain is Domain.NUMERICAL:
            values.append(0.0 if raw is None else _typed(attr, raw))
        else:
            values.append("" if raw is None else _typed(attr, raw))
    return LogEntry(t, tuple(values))


def standardize_all(flats: Iterable[FlatLog], schema: Schema):
    """Standardize a corpus; returns ``([(host, entry), ...], diagnostics)``.

    ``diagnostics`` counts rejected records by reason plus ``"discarded"``
    (no schema key present). Rejections are never fatal.
    """
    out = []
    diagnostics: Counter = Counter()
    for flat in flats:
        try:
            entry = standardize(flat, schema)
        except RecordRejected as exc:
            diagnostics[str(exc)] += 1
            continue
        if entry is None:
            diagnostics["discarded"] += 1
            continue
        out.append((flat.source_host, entry))
    return out, diagnostics


def fit_schema_stats(flats: Iterable[FlatLog], schema: Schema) -> Schema:
    """Fit numerical ranges and categorical vocabularies over a corpus.

    Vocabularies are the null slot followed by distinct uppercased labels in
    first-seen order. Records with no schema key are ignored, as are
    individual values that fail type coercion.
    """
    lo: dict = {}
    hi: dict = {}
    vocab: dict = {a.name: {} for a in schema.attributes if a.domain is Domain.CATEGORICAL}
    seen = 0
    for flat in flats:
        seen += 1
        if not any(_present(flat, a) for a in schema.attributes):
            continue
        for attr in schema.attributes:
            raw = flat.pairs.get(attr.source_key)
            if raw is None or attr.domain is Domain.STRING:
                continue
            try:
                value = _typed(attr, raw)
            except RecordRejected:
                continue
            if attr.domain is Domain.NUMERICAL:
                lo[attr.name] = min(lo.get(attr.name, value), value)
                hi[attr.name] = max(hi.get(attr.name, value), value)
            else:
                vocab[attr.name].setdefault(value, None)
    if not seen:
        raise SchemaError("no records")
    attrs = []
    for attr in schema.attributes:
        if attr.domain is Domain.NUMERICAL:
            if attr.name not in lo:
                raise SchemaError(f"no numerical values for attribute {attr.name}")
            attr = replace(attr, x_min=lo[attr.name], x_max=hi[attr.name])
        elif attr.domain is Domain.CATEGORICAL:
            attr = replace(attr, vocabulary=(None, *vocab[attr.name]))
        attrs.append(attr)
    return replace(schema, attributes=tuple(attrs))


def build_streams(entries: Iterable[tuple[str, LogEntry]]) -> list[LogStream]:
    """Group ``(host, entry)`` pairs into per-host streams, sorted by host.

    Entries are stably sorted by time, so equal timestamps keep input order.
    """
    groups: dict = {}
    for host, entry in entries:
        groups.setdefault(host, []).append(entry)
    return [
        LogStream(host, sorted(groups[host], key=lambda e: e.time))
        for host in sorted(groups, key=str)
    ]


def project_entry(entry: LogEntry, schema: Schema, keep: Sequence[str]) -> LogEntry:
    idx = [i for i, name in enumerate(schema.names) if name in keep]
    return LogEntry(entry.time, tuple(entry.values[i] for i in idx))
