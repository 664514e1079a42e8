"""Command-line driver: file-in/file-out pipelines over the library.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, synth
from .aggregate import centroid, centroid_to_dict
from .analytics import (NOISE, DistanceMatrix, binned_centroids, dbscan, default_eps, elbow,
                        hour_histogram, kmeans, knn_classify, mmds, pairwise_matrix, split_id,
                        subsequences)
from .analytics.temporal import ID_SEP
from .detect import DEFAULT_THRESHOLD, DEFAULT_WARMUP, detect, extract_signature, scan
from .errors import LogSpaceError
from .ingest import build_streams, fit_schema_stats, project_entry, standardize_all


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# -- shared loading -------------------------------------------------------------------

def _load_streams(args):
    """Fitted schema and per-host streams, with ``--drop`` attributes removed."""
    schema = io.load_schema(args.schema)
    if not schema.fitted:
        raise LogSpaceError(f"{args.schema}: schema is not fitted (run ingest first)")
    pairs = io.read_entries(args.entries, schema)
    drop = getattr(args, "drop", None) or []
    if drop:
        keep = [n for n in schema.names if n not in drop]
        projected = schema.project(keep)
        pairs = [(h, project_entry(e, schema, keep)) for h, e in pairs]
        schema = projected
    streams = build_streams(pairs)
    if getattr(args, "host", None):
        streams = [s for s in streams if s.host in set(args.host)]
    if not streams:
        raise LogSpaceError("no entries to process")
    return schema, streams


def _subsequence_items(streams, m):
    ids, items = [], []
    for s in streams:
        if len(s) < m:
            continue
        for j, window in enumerate(subsequences(s, m)):
            ids.append(f"{s.host}{ID_SEP}{j * m}")
            items.append(window)
    if not items:
        raise LogSpaceError(f"no stream has at least m={m} entries")
    return ids, items


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path, obj, sort_keys=True):
    io.atomic_write(path, json.dumps(obj, indent=2, sort_keys=sort_keys, ensure_ascii=False) + "\n")


# -- commands --------------------------------------------------------------------------

def cmd_synth(args):
    out = _out_dir(args.out)
    if args.kind == "detection":
        docs, truth = synth.detection_corpus(seed=args.seed)
        config = synth.schema_config(include_cmdline=True)
    else:
        docs, truth = synth.roles_corpus(seed=args.seed)
        config = synth.schema_config(include_cmdline=False)
    io.write_jsonl(out / "logs.jsonl", docs)
    _write_json(out / "schema.json", config, sort_keys=False)
    _write_json(out / "truth.json", truth)
    print(f"wrote {len(docs)} documents to {out / 'logs.jsonl'}", file=sys.stderr)


def cmd_ingest(args):
    out = _out_dir(args.out)
    schema = io.load_schema(args.schema)
    if args.host_key:
        schema = replace(schema, host_key=args.host_key)
    flats, diagnostics = [], None
    for path in args.input:
        f, diag = io.read_flat_logs(path, schema, host=args.host)
        flats.extend(f)
        diagnostics = diag if diagnostics is None else diagnostics + diag
    schema = fit_schema_stats(flats, schema)
    pairs, diag = standardize_all(flats, schema)
    diagnostics += diag
    missing_host = sum(1 for h, _ in pairs if h is None)
    if missing_host:
        diagnostics["missing host"] += missing_host
        pairs = [(h, e) for h, e in pairs if h is not None]
    if not pairs:
        raise LogSpaceError("no records")
    io.write_entries(out / "entries.jsonl", pairs, schema)
    io.save_schema(out / "schema.json", schema)
    print(f"read {len(flats)} records, kept {len(pairs)}", file=sys.stderr)
    for reason, count in sorted(diagnostics.items()):
        print(f"  {reason}: {count}", file=sys.stderr)


def cmd_signature(args):
    schema = io.load_schema(args.schema)
    pairs = io.read_entries(args.entries, schema)
    streams = {s.host: s for s in build_streams(pairs)}
    if args.host not in streams:
        raise LogSpaceError(f"no stream for host {args.host!r}")
    stream = streams[args.host]
    if args.start is not None:
        start = args.start
        end = args.end if args.end is not None else start + args.length
    elif args.t_start is not None:
        times = stream.times
        start = int(np.searchsorted(times, args.t_start, side="left"))
        end = int(np.searchsorted(times, args.t_end, side="right")) if args.t_end is not None \
            else start + args.length
    else:
        raise UsageError("give --start or --t-start")
    try:
        sig = extract_signature(stream, start, end)
    except IndexError as exc:
        raise LogSpaceError(str(exc)) from exc
    io.save_signature(args.out, sig, schema)
    print(f"signature of {sig.n_sig} entries from {sig.host}[{start}:{end}]", file=sys.stderr)


def cmd_dist(args):
    schema, streams = _load_streams(args)
    if args.unit == "entry":
        ids = [f"{s.host}{ID_SEP}{i}" for s in streams for i in range(len(s))]
        items = [e for s in streams for e in s]
        dm = pairwise_matrix(items, schema, "entry", ids)
    elif args.unit in ("day", "hour"):
        ids, cents = binned_centroids(streams, schema, args.unit, args.tz)
        dm = pairwise_matrix(cents, schema, "centroid", ids)
    elif args.unit == "stream":
        ids = [s.host for s in streams]
        dm = pairwise_matrix([centroid(list(s), schema) for s in streams], schema, "centroid", ids)
    else:
        ids, items = _subsequence_items(streams, args.m)
        dm = pairwise_matrix(items, schema, "stream", ids)
    io.write_matrix(args.out, dm)
    print(f"{dm.n} x {dm.n} matrix written to {args.out}", file=sys.stderr)


def cmd_detect(args):
    schema, streams = _load_streams(args)
    sig = io.load_signature(args.signature, schema)
    out = _out_dir(args.out)
    alerts, trace, summary = [], [], []
    for s in streams:
        if len(s) < sig.n_sig:
            raise LogSpaceError(f"signature ({sig.n_sig}) longer than stream {s.host} ({len(s)})")
        found = detect(sig, s, schema, args.threshold, args.warmup)
        distances, pvalues, scored = scan(sig, s, schema, args.warmup)
        alerts.extend(found)
        for k, (d, p, ok) in enumerate(zip(distances, pvalues, scored)):
            trace.append((s.host, k, s.entries[k + sig.n_sig - 1].time, float(d), float(p), int(ok)))
        masked = np.where(scored, pvalues, 1.0)
        summary.append((s.host, len(distances), float(masked.min()), len(found)))
    io.write_jsonl(out / "alerts.jsonl", (io.alert_to_dict(a) for a in alerts))
    io.write_csv(out / "trace.csv", ["host", "window", "time", "distance", "p_value", "scored"], trace)
    io.write_csv(out / "summary.csv", ["host", "windows", "min_p_value", "alerts"], summary)
    for row in summary:
        print(f"{row[0]}: min p = {row[2]:.3g}, {row[3]} alerts", file=sys.stderr)


def _parse_range(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad k range {text!r}, expected LO:HI") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"bad k range {text!r}")
    return range(lo, hi + 1)


def _write_centroids(path, labels, items, schema):
    doc = {}
    for lab in sorted(set(int(x) for x in labels)):
        members = [items[i] for i in np.flatnonzero(np.asarray(labels) == lab)]
        doc[str(lab)] = centroid_to_dict(centroid(members, schema), schema)
    _write_json(path, doc, sort_keys=False)


def cmd_cluster_kmeans(args):
    k_range = _parse_range(args.k_range) if args.k_range else None
    schema, streams = _load_streams(args)
    ids, cents = binned_centroids(streams, schema, args.unit, args.tz)
    out = _out_dir(args.out)
    if k_range is not None:
        curve = elbow(cents, schema, k_range, seed=args.seed, restarts=args.restarts,
                      seeding=args.seeding)
        io.write_csv(out / "elbow.csv", ["k", "wcss"], curve)
    result = kmeans(cents, schema, args.k, seed=args.seed, seeding=args.seeding)
    io.write_csv(out / "labels.csv", ["item_id", "label"], zip(ids, result.labels.tolist()))
    _write_centroids(out / "centroids.json", result.labels, cents, schema)
    print(f"{len(ids)} items in {args.k} clusters, WCSS {result.wcss:.6g}", file=sys.stderr)


def cmd_cluster_dbscan(args):
    items = schema = None
    if args.matrix:
        dm = io.read_matrix(args.matrix)
    elif args.entries and args.schema:
        schema, streams = _load_streams(args)
        ids, items = _subsequence_items(streams, args.m)
        dm = pairwise_matrix(items, schema, "stream", ids)
    else:
        raise UsageError("give --matrix, or --entries and --schema")
    eps = args.eps if args.eps is not None else default_eps(dm, args.min_pts)
    result = dbscan(dm, eps, args.min_pts)
    out = _out_dir(args.out)
    io.write_csv(out / "labels.csv", ["item_id", "label"], zip(dm.ids, result.labels.tolist()))
    if items is not None:
        flat_items, flat_labels = [], []
        for window, lab in zip(items, result.labels):
            flat_items.extend(window)
            flat_labels.extend([lab] * len(window))
        _write_centroids(out / "centroids.json", flat_labels, flat_items, schema)
    n_noise = int(np.sum(result.labels == NOISE))
    n_clusters = len(set(result.labels.tolist()) - {NOISE})
    print(f"eps={eps:.6g}: {n_clusters} clusters, {n_noise} outliers", file=sys.stderr)


def _read_roles(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return doc.get("roles", doc) if isinstance(doc, dict) else {}


def cmd_classify(args):
    dm = io.read_matrix(args.matrix)
    hosts = [split_id(i)[0] or str(i) for i in dm.ids]
    if args.by == "host":
        labels, groups = hosts, None
    else:
        if not args.roles:
            raise UsageError("--by role needs --roles")
        roles = _read_roles(args.roles)
        missing = sorted(set(hosts) - set(roles))
        if missing:
            raise LogSpaceError(f"no role for hosts {missing}")
        labels, groups = [roles[h] for h in hosts], hosts
    result = knn_classify(dm, labels, args.K, groups)
    out = _out_dir(args.out)
    unscored = set(result.unscored)
    rows = [(i, t, p, int(j not in unscored))
            for j, (i, t, p) in enumerate(zip(dm.ids, labels, result.predictions))]
    io.write_csv(out / "predictions.csv", ["item_id", "label", "predicted", "scored"], rows)
    _write_json(out / "f1.json", {"K": args.K, "by": args.by, "f1": result.f1,
                                  "macro_f1": result.macro_f1,
                                  "unscored": [dm.ids[j] for j in result.unscored]})
    print(f"macro F1 {result.macro_f1:.4f}", file=sys.stderr)


def cmd_embed(args):
    dm = io.read_matrix(args.matrix)
    emb = mmds(dm, seed=args.seed, max_iter=args.max_iter, tol=args.tol)
    out = _out_dir(args.out)
    rows = [(i, float(x), float(y)) for i, (x, y) in zip(dm.ids, emb.coordinates)]
    io.write_csv(out / "embedding.csv", ["item_id", "x", "y"], rows)
    _write_json(out / "embedding.json", {"stress": emb.stress, "n_iter": emb.n_iter})
    print(f"stress {emb.stress:.6g} after {emb.n_iter} iterations", file=sys.stderr)


def cmd_hist(args):
    header, rows = io.read_csv(args.labels)
    if header[:2] != ["item_id", "label"]:
        raise LogSpaceError(f"{args.labels}: expected item_id,label columns")
    try:
        ids = [r[0] for r in rows]
        labels = [int(r[1]) for r in rows]
        table = hour_histogram(ids, labels)
    except (IndexError, ValueError) as exc:
        raise LogSpaceError(f"{args.labels}: ids must be host|YYYY-MM-DDTHH ({exc})") from exc
    io.write_csv(args.out, ["host", "hour", "cluster_label", "count"], table)


# -- parser --------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="logspace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def entries_args(sp, hosts=True):
        sp.add_argument("--schema", required=True, help="fitted schema JSON")
        sp.add_argument("--entries", required=True, help="entries JSON-lines from ingest")
        sp.add_argument("--drop", action="append", metavar="ATTR", help="attribute to leave out")
        if hosts:
            sp.add_argument("--host", action="append", help="restrict to these hosts")

    s = sub.add_parser("synth", help="generate a synthetic corpus")
    s.add_argument("--kind", choices=["detection", "roles"], default="detection")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", help="flatten and standardize raw JSON-lines logs")
    s.add_argument("--schema", required=True, help="schema config JSON")
    s.add_argument("--input", required=True, nargs="+")
    s.add_argument("--host-key", help="flattened key naming the source host")
    s.add_argument("--host", help="constant host for every record")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("signature", help="cut a signature out of one host stream")
    s.add_argument("--schema", required=True)
    s.add_argument("--entries", required=True)
    s.add_argument("--host", required=True)
    s.add_argument("--start", type=int, help="first entry index")
    s.add_argument("--end", type=int, help="one past the last entry index")
    s.add_argument("--t-start", type=float, help="first entry time (epoch seconds)")
    s.add_argument("--t-end", type=float, help="last entry time (epoch seconds)")
    s.add_argument("--length", type=int, default=7, help="entries when no end is given")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_signature)

    s = sub.add_parser("dist", help="pairwise distance matrix")
    entries_args(s)
    s.add_argument("--unit", choices=["entry", "stream", "day", "hour", "subseq"], default="day")
    s.add_argument("--m", type=int, default=7, help="subsequence length")
    s.add_argument("--tz", default="UTC")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("detect", help="scan streams for a signature")
    entries_args(s)
    s.add_argument("--signature", required=True)
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("cluster-kmeans", help="k-means over clock-bin centroids")
    entries_args(s)
    s.add_argument("--unit", choices=["hour", "day"], default="hour")
    s.add_argument("--tz", default="UTC")
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--k-range", help="elbow scan LO:HI, e.g. 2:10")
    s.add_argument("--restarts", type=int, default=5)
    s.add_argument("--seeding", choices=["inverse", "kmeans++"], default="inverse")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster_kmeans)

    s = sub.add_parser("cluster-dbscan", help="DBSCAN over a matrix or m-entry subsequences")
    s.add_argument("--matrix")
    s.add_argument("--schema")
    s.add_argument("--entries")
    s.add_argument("--drop", action="append", metavar="ATTR")
    s.add_argument("--host", action="append")
    s.add_argument("--m", type=int, default=7)
    s.add_argument("--eps", type=float, help="default: median 4th-neighbour distance")
    s.add_argument("--min-pts", type=int, default=4)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster_dbscan)

    s = sub.add_parser("classify", help="kNN classification over a matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--by", choices=["host", "role"], default="host")
    s.add_argument("--roles", help="JSON mapping host to role (or a truth.json)")
    s.add_argument("--K", type=int, default=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("embed", help="2-D metric MDS of a matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("hist", help="per-host hour-of-day cluster counts")
    s.add_argument("--labels", required=True, help="labels.csv from cluster-kmeans")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_hist)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"logspace {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (LogSpaceError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"logspace {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
