"""File formats: JSON-lines records, JSON documents and CSV tables.

Every writer goes through :func:`atomic_write` (temp file + rename).
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections import Counter
from dataclasses import asdict
from pathlib import Path
from typing import Iterable

import numpy as np

from .analytics.matrix import DistanceMatrix
from .detect import Alert, Signature
from .errors import LogSpaceError, SchemaError
from .aggregate import NULL_LABEL
from .ingest import Domain, FlatLog, LogEntry, Pairs, Schema, flatten_document


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def write_jsonl(path, records: Iterable) -> None:
    atomic_write(path, "".join(dumps(r) + "\n" for r in records))


# -- raw logs -----------------------------------------------------------------

def read_flat_logs(path, schema: Schema, host: str | None = None):
    """Flattened records of a JSON-lines file plus a diagnostics counter.

    The host comes from ``host`` if given, else from the schema's
    ``host_key``; the raw time from the schema's ``time_key``.
    """
    flats = []
    diagnostics: Counter = Counter()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                doc = json.loads(line, object_pairs_hook=Pairs)
            except json.JSONDecodeError:
                diagnostics["invalid json"] += 1
                continue
            pairs = flatten_document(doc)
            source = host if host is not None else pairs.get(schema.host_key) if schema.host_key else None
            flats.append(FlatLog(pairs, None if source is None else str(source),
                                 pairs.get(schema.time_key)))
    return flats, diagnostics


# -- schema ---------------------------------------------------------------------

def load_schema(path) -> Schema:
    try:
        with open(path, encoding="utf-8") as fh:
            return Schema.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def save_schema(path, schema: Schema) -> None:
    atomic_write(path, json.dumps(schema.to_dict(), indent=2, ensure_ascii=False) + "\n")


# -- entries --------------------------------------------------------------------

def entry_to_dict(entry: LogEntry, schema: Schema, host: str | None = None) -> dict:
    values = {}
    for attr, v in zip(schema.attributes, entry.values):
        if attr.domain is Domain.CATEGORICAL:
            v = np.asarray(v)
            nz = np.flatnonzero(v)
            if len(nz) == 1 and v[nz[0]] == 1.0:
                values[attr.name] = attr.vocabulary[nz[0]]
            else:
                values[attr.name] = {NULL_LABEL if attr.vocabulary[i] is None else attr.vocabulary[i]: float(v[i]) for i in nz}
        elif attr.domain is Domain.NUMERICAL:
            values[attr.name] = float(v)
        else:
            values[attr.name] = v
    out = {"time": entry.time, "values": values}
    if host is not None:
        out["host"] = host
    return out


def entry_from_dict(doc: dict, schema: Schema) -> LogEntry:
    values = []
    for attr in schema.attributes:
        v = doc["values"].get(attr.name)
        if attr.domain is Domain.CATEGORICAL:
            if isinstance(v, dict):
                vec = np.zeros(attr.dim)
                for label, p in v.items():
                    vec[attr.category_index(None if label == NULL_LABEL else label)] += p
                values.append(vec)
            else:
                values.append(attr.one_hot(v))
        elif attr.domain is Domain.NUMERICAL:
            values.append(float(v if v is not None else 0.0))
        else:
            values.append("" if v is None else str(v))
    return LogEntry(float(doc["time"]), tuple(values))


def write_entries(path, pairs, schema: Schema) -> None:
    write_jsonl(path, (entry_to_dict(e, schema, h) for h, e in pairs))


def read_entries(path, schema: Schema) -> list[tuple[str, LogEntry]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                out.append((doc.get("host"), entry_from_dict(doc, schema)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise LogSpaceError(f"{path}:{n}: bad entry record ({exc})") from exc
    return out


# -- signatures and alerts ----------------------------------------------------------

def signature_to_dict(sig: Signature, schema: Schema) -> dict:
    return {
        "origin": {"host": sig.host, "start_index": sig.start_index,
                   "end_index": sig.end_index, "t_start": sig.t_start, "t_end": sig.t_end},
        "entries": [entry_to_dict(e, schema) for e in sig.entries],
    }


def save_signature(path, sig: Signature, schema: Schema) -> None:
    atomic_write(path, json.dumps(signature_to_dict(sig, schema), indent=2,
                                  ensure_ascii=False, sort_keys=True) + "\n")


def load_signature(path, schema: Schema) -> Signature:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        origin = doc["origin"]
        entries = tuple(entry_from_dict(e, schema) for e in doc["entries"])
        return Signature(entries, origin["host"], int(origin["start_index"]),
                         int(origin["end_index"]))
    except (KeyError, TypeError) as exc:
        raise LogSpaceError(f"{path}: bad signature file ({exc})") from exc


def alert_to_dict(alert: Alert) -> dict:
    return asdict(alert)


# -- CSV tables -------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    atomic_write(path, buf.getvalue())


def read_csv(path) -> tuple[list, list]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise LogSpaceError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def write_matrix(path, dm: DistanceMatrix) -> None:
    """n x n CSV with a header row of item ids."""
    write_csv(path, list(dm.ids), dm.values.tolist())


def read_matrix(path) -> DistanceMatrix:
    header, rows = read_csv(path)
    try:
        values = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise LogSpaceError(f"{path}: non-numeric matrix entry") from exc
    return DistanceMatrix(values, header)
