"""Numbered acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary and on
stdout with ``-s``) before asserting.
"""
import functools
import math
import time

import numpy as np
import pytest

from logspace import _pykernels, synth
from logspace.aggregate import centroid, centroid_to_dict
from logspace.analytics import (DistanceMatrix, binned_centroids, dbscan, elbow, kmeans,
                                knn_classify, mmds, pairwise_matrix, split_id)
from logspace.detect import DetectorState, extract_signature, online_pvalue, scan, t_pvalue
from logspace.ingest import (Attribute, Domain, FlatLog, RawLog, Schema, build_streams,
                            fit_schema_stats, flatten, standardize, standardize_all)
from logspace.metrics import (d_categorical, d_entry, d_numerical, d_stream_seq, d_string, lev)

from _helpers import entry, random_entry, random_string, t_cdf_oracle, toy_schema
from conftest import ACCEPTANCE_LINES

try:
    from logspace import _ckernels
except ImportError:  # extension not built
    _ckernels = None

pytestmark = pytest.mark.acceptance


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


# -- 1: metric axioms ---------------------------------------------------------------------

def _axiom_violations(d, sample, n, equal, tol=1e-9):
    bad = 0
    for _ in range(n):
        x, y, z = sample(), sample(), sample()
        dxy, dyz, dxz, dyx = d(x, y), d(y, z), d(x, z), d(y, x)
        bad += dxy < -tol or d(x, x) > tol
        bad += (not equal(x, y)) and dxy <= 0.0
        bad += abs(dxy - dyx) > tol
        bad += dxz > dxy + dyz + tol
    return bad


def test_01_metric_axioms():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    schema = toy_schema()
    n = 10_000
    same_vec = lambda a, b: np.array_equal(a, b)
    same_entry = lambda a, b: all(np.array_equal(np.asarray(u), np.asarray(v))
                                  for u, v in zip(a.values, b.values))
    checks = {
        "d_categorical": (d_categorical,
                          lambda: rng.dirichlet(np.ones(5)) if rng.random() < 0.5
                          else np.eye(5)[rng.integers(5)], same_vec),
        "d_numerical": (lambda x, y: d_numerical(x, y, 0.0, 10.0),
                        lambda: float(rng.uniform(-5, 15)), lambda a, b: a == b),
        "d_string": (d_string, lambda: random_string(rng, 8, "abc\\."), lambda a, b: a == b),
        "d_entry": (lambda a, b: d_entry(a, b, schema),
                    lambda: random_entry(rng, schema, soft=True), same_entry),
        "d_stream_seq": (lambda f, g: d_stream_seq(f, g, schema),
                         lambda: [random_entry(rng, schema, soft=True) for _ in range(3)],
                         lambda f, g: all(same_entry(a, b) for a, b in zip(f, g))),
    }
    counts = {name: _axiom_violations(d, s, n, eq) for name, (d, s, eq) in checks.items()}
    elapsed = time.perf_counter() - start
    ok = sum(counts.values()) == 0 and elapsed < 30
    record(1, ok, f"metric axioms, {n} triples x 5 metrics, violations {counts}, {elapsed:.1f}s")


# -- 2: Levenshtein oracle -------------------------------------------------------------------

def lev_recursive(a, b):
    @functools.lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(rec(i + 1, j) + 1, rec(i, j + 1) + 1, rec(i + 1, j + 1) + (a[i] != b[j]))
    return rec(0, 0)


def test_02_levenshtein_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    impls = [lev, _pykernels.lev] + ([_ckernels.lev] if _ckernels is not None else [])
    mismatches = 0
    n = 10_000
    for _ in range(n):
        a = random_string(rng, 8, "abc")
        b = random_string(rng, 8, "abc")
        expected = lev_recursive(a, b)
        mismatches += sum(f(a, b) != expected for f in impls)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    record(2, ok, f"lev vs recursion, {n} pairs x {len(impls)} implementations, "
                  f"{mismatches} mismatches, {elapsed:.1f}s")


# -- 3: figure distances ------------------------------------------------------------------------

FIG_SCHEMA = {
    "time_key": "Time",
    "attributes": [
        {"name": "BaseFileName", "domain": "categorical", "source_key": "NewProc", "derivation": "basename"},
        {"name": "BaseFileExtn", "domain": "categorical", "source_key": "NewProc", "derivation": "extension"},
        {"name": "CreatorProc", "domain": "categorical", "source_key": "CreatorProc", "derivation": "basename"},
        {"name": "TokenElevation", "domain": "numerical", "source_key": "TokenElevation"},
        {"name": "CmdLine", "domain": "string", "source_key": "CmdLine"},
    ],
}

TMP_Y = "C:\\Users\\hostY\\AppData\\Local\\Temp\\Low\\8D6.tmp"
TMP_X = "C:\\Users\\hostX\\AppData\\Local\\Temp\\Low\\4328.tmp"
FIGURE_LOGS = {
    "tmp_left": {"CmdLine": TMP_Y, "CreatorProc": "iexplore", "NewProc": TMP_Y, "TokenElevation": 3},
    "tmp_right": {"CmdLine": TMP_X, "CreatorProc": "iexplore", "NewProc": TMP_X, "TokenElevation": 3},
    "explorer_left": {"CmdLine": "C:\\Windows\\explorer.exe", "CreatorProc": "userinit",
                      "NewProc": "C:\\Windows\\explorer.exe", "TokenElevation": 3},
    "explorer_center": {"CmdLine": "C:\\Windows\\Explorer.exe", "CreatorProc": "explorer",
                        "NewProc": "C:\\Windows\\explorer.exe", "TokenElevation": 3},
    "explorer_right": {"CreatorProc": "4328", "NewProc": "C:\\Windows\\SysWOW64\\explorer.exe",
                       "TokenElevation": 3},
}


def test_03_figure_distances():
    schema = Schema.from_dict(FIG_SCHEMA)
    flats = {k: FlatLog(dict(v), raw_time=1446532736 + 30 * i)
             for i, (k, v) in enumerate(FIGURE_LOGS.items())}
    fitted = fit_schema_stats(flats.values(), schema)
    e = {k: standardize(f, fitted) for k, f in flats.items()}
    d_pair = d_entry(e["tmp_left"], e["tmp_right"], fitted)
    d_far = d_entry(e["tmp_left"], e["explorer_left"], fitted)

    # maximally distant pair: every categorical differs, the elevation spans
    # the whole denominator (absent -> 0 against 3 on the fitted range [1, 3]),
    # and a nonempty command line faces an empty one
    wide = fit_schema_stats([FlatLog(dict(v, TokenElevation=lvl), raw_time=0)
                             for v, lvl in zip(FIGURE_LOGS.values(), [1, 2, 3, 3, 3])], schema)
    a = standardize(FlatLog({"NewProc": "C:\\Windows\\explorer.exe", "CreatorProc": "userinit",
                             "TokenElevation": 3, "CmdLine": "C:\\Windows\\explorer.exe"},
                            raw_time=0), wide)
    b = standardize(FlatLog({"NewProc": TMP_X, "CreatorProc": "iexplore"}, raw_time=0), wide)
    d_max = d_entry(a, b, wide)
    ok = (abs(d_pair - 1.011) <= 0.05 and abs(d_far - 1.866) <= 0.05
          and abs(d_max - math.sqrt(5)) <= 1e-12)
    record(3, ok, f"figure distances {d_pair:.4f} (1.011), {d_far:.4f} (1.866), "
                  f"max {d_max:.12f} (sqrt 5 = {math.sqrt(5):.12f})")


# -- 4: centroid fractions -------------------------------------------------------------------------

def test_04_centroid_fractions():
    schema = Schema((
        Attribute("CreatorProc", Domain.CATEGORICAL, "c", vocabulary=(None, "NGENTASK", "NGEN")),
        Attribute("BaseFileName", Domain.CATEGORICAL, "b", vocabulary=(None, "NGEN", "MSCORSVW")),
    ), "t")
    members = [entry(schema, CreatorProc="NGENTASK", BaseFileName="NGEN")] * 6
    members.append(entry(schema, CreatorProc="NGEN", BaseFileName="MSCORSVW"))
    listing = centroid_to_dict(centroid(members, schema), schema)["attributes"]["CreatorProc"]
    exact = listing == {"NGENTASK": 6 / 7, "NGEN": 1 / 7}
    rounded = {k: round(v, 2) for k, v in listing.items()}
    close = abs(rounded["NGENTASK"] - 0.86) <= 0.005 and abs(rounded["NGEN"] - 0.14) <= 0.005
    record(4, exact and close, f"centroid fractions {rounded} (exact 6/7, 1/7: {exact})")


# -- 5: detection separation ---------------------------------------------------------------------

def _synthetic_streams(docs, config):
    schema = Schema.from_dict(config)
    flats = [flatten(RawLog(d)) for d in docs]
    flats = [FlatLog(f.pairs, f.pairs.get(synth.HOST_KEY), f.pairs.get(synth.TIME_KEY)) for f in flats]
    schema = fit_schema_stats(flats, schema)
    pairs, _ = standardize_all(flats, schema)
    return schema, {s.host: s for s in build_streams(pairs)}


def test_05_detection_separation():
    start = time.perf_counter()
    docs, truth = synth.detection_corpus(seed=0)
    schema, streams = _synthetic_streams(docs, synth.schema_config())
    attack_hosts = [a["host"] for a in truth["attacks"]]
    ambient = truth["ambient_hosts"]
    gaps, ambient_alerts, windows = [], 0, []
    for a in truth["attacks"]:
        s = streams[a["host"]]
        i = int(np.searchsorted(s.times, a["t_start"]))
        sig = extract_signature(s, i, i + a["length"])
        assert sig.t_end == a["t_end"]
        min_p = {}
        for host, stream in streams.items():
            _, p, scored = scan(sig, stream, schema)
            min_p[host] = float(np.where(scored, p, 1.0).min())
            windows.append(len(p))
            if host in ambient:
                ambient_alerts += int(np.sum(scored & (p <= 1e-15)))
        worst_attack = max(min_p[h] for h in attack_hosts if h != a["host"])
        best_ambient = min(min_p[h] for h in ambient)
        gaps.append(math.log10(best_ambient) - math.log10(worst_attack))
    elapsed = time.perf_counter() - start
    ok = min(gaps) >= 6 and ambient_alerts == 0 and min(windows) >= 2000 and elapsed < 120
    record(5, ok, f"detection, smallest attack/ambient gap {min(gaps):.1f} orders "
                  f"(need 6), ambient alerts {ambient_alerts}, min windows {min(windows)}, "
                  f"{elapsed:.1f}s")


# -- 6: t-CDF ---------------------------------------------------------------------------------------

def test_06_t_cdf():
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(1000):
        df = int(rng.integers(29, 3000))
        history = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 5), size=df)
        d = float(history.mean() + rng.uniform(-40, 8) * history.std())
        full = np.append(history, d)
        state = DetectorState(count=df, mean=float(history.mean()),
                              m2=float(((history - history.mean()) ** 2).sum()))
        p, _ = online_pvalue(state, d)
        t_star = (d - full.mean()) / full.std(ddof=1)
        worst = max(worst, abs(p - t_cdf_oracle(t_star, df)))
        t_direct = float(rng.uniform(-50, 50))
        df_direct = float(rng.uniform(1, 5000))
        worst = max(worst, abs(t_pvalue(t_direct, df_direct) - t_cdf_oracle(t_direct, df_direct)))
    half = DetectorState(warmup_min=2)
    for x in [1.0, 3.0] * 20:
        _, half = online_pvalue(half, x)
    p0, _ = online_pvalue(half, 2.0)
    ok = worst <= 1e-10 and abs(p0 - 0.5) <= 1e-12
    record(6, ok, f"t-CDF vs incomplete-beta oracle, max abs error {worst:.2e} over 2000 pairs, "
                  f"p(t*=0) = {p0!r}")


# -- 7: kNN ---------------------------------------------------------------------------------------

def test_07_knn():
    start = time.perf_counter()
    docs, truth = synth.roles_corpus(seed=0)
    schema, streams = _synthetic_streams(docs, synth.schema_config(include_cmdline=False))
    ids, cents = binned_centroids(list(streams.values()), schema, "day")
    dm = pairwise_matrix(cents, schema, "centroid", ids)
    hosts = [split_id(i)[0] for i in ids]
    roles = [truth["roles"][h] for h in hosts]
    by_role = knn_classify(dm, roles, K=3, groups=hosts)
    by_host = knn_classify(dm, hosts, K=3)
    elapsed = time.perf_counter() - start
    role_f1 = min(by_role.f1.values())
    ok = (dm.n == 61 and role_f1 == 1.0 and by_host.macro_f1 >= 0.9 and elapsed < 30)
    record(7, ok, f"kNN on {dm.n} daily streams, role F1 {by_role.f1} "
                  f"({len(by_role.unscored)} single-host-role streams unscored), "
                  f"host macro F1 {by_host.macro_f1:.3f}, {elapsed:.1f}s")


# -- 8: mMDS ----------------------------------------------------------------------------------------

def _planar(points):
    return np.sqrt(((points[:, None] - points[None]) ** 2).sum(-1))


def test_08_mmds():
    rng = np.random.default_rng(808)
    pts = rng.uniform(size=(20, 2))
    dm = DistanceMatrix(_planar(pts), None)
    emb = mmds(dm, seed=0)
    recovery = float(np.abs(_planar(emb.coordinates) - dm.values).max())
    rising = 0
    for _ in range(100):
        n = int(rng.integers(4, 16))
        v = rng.uniform(0.1, 2.0, size=(n, n))
        v = np.triu(v, 1)
        v = v + v.T
        trace = np.array(mmds(DistanceMatrix(v, None), seed=int(rng.integers(1000))).stress_trace)
        rising += int(np.any(np.diff(trace) > 1e-12 * trace[0]))
    ok = recovery <= 1e-6 and rising == 0
    record(8, ok, f"mMDS recovery error {recovery:.2e} on 20 planar points, "
                  f"{rising}/100 random matrices with a rising stress trace")


# -- 9: DBSCAN oracle ---------------------------------------------------------------------------

def dbscan_reference(values, eps, min_pts):
    """Core points, their connected components, borders, then noise."""
    n = len(values)
    near = values <= eps
    core = near.sum(axis=1) >= min_pts
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for i in range(n):
        for j in range(n):
            if core[i] and core[j] and near[i, j]:
                parent[find(j)] = find(i)
    roots = {}
    for i in range(n):  # components numbered by their lowest-index core point
        if core[i] and find(i) not in roots:
            roots[find(i)] = len(roots)
    labels = []
    for i in range(n):
        if core[i]:
            labels.append(roots[find(i)])
        else:
            owners = [roots[find(j)] for j in range(n) if core[j] and near[i, j]]
            labels.append(min(owners) if owners else -1)
    return labels


def toy_matrices(rng, count=150):
    out = []
    for t in range(count):
        if t % 3 == 0:  # integer distances: lots of ties at eps
            pts = rng.integers(0, 6, size=(12, 2)).astype(float)
        elif t % 3 == 1:  # a few blobs plus strays
            centers = rng.uniform(0, 10, size=(3, 2))
            pts = centers[rng.integers(3, size=12)] + rng.normal(0, 0.5, size=(12, 2))
        else:
            pts = rng.uniform(0, 5, size=(12, 2))
        out.append(_planar(pts))
    return out


def test_09_dbscan_oracle():
    rng = np.random.default_rng(909)
    cases = mismatches = noise_mismatches = 0
    for values in toy_matrices(rng):
        dm = DistanceMatrix(values, None)
        for eps in (0.5, 1.0, 1.5, 2.0, 3.0):
            for min_pts in (1, 2, 3, 4, 5):
                got = dbscan(dm, eps, min_pts).labels.tolist()
                ref = dbscan_reference(values, eps, min_pts)
                cases += 1
                mismatches += got != ref
                noise_mismatches += {i for i, x in enumerate(got) if x == -1} != \
                    {i for i, x in enumerate(ref) if x == -1}
    ok = mismatches == 0 and noise_mismatches == 0
    record(9, ok, f"DBSCAN vs reference on {cases} 12-point cases, label mismatches "
                  f"{mismatches}, noise-set mismatches {noise_mismatches}")


# -- 10: k-means ----------------------------------------------------------------------------------

def test_10_kmeans():
    rng = np.random.default_rng(1010)
    schema = toy_schema()
    rising = 0
    for t in range(100):
        items = [random_entry(rng, schema, soft=bool(t % 2)) for _ in range(int(rng.integers(10, 40)))]
        a = kmeans(items, schema, int(rng.integers(2, 7)), seed=t)
        rising += int(np.any(np.diff(a.wcss_trace) > 1e-9))
    non_monotone = 0
    for t in range(10):
        items = [random_entry(rng, schema, soft=True) for _ in range(30)]
        w = [v for _, v in elbow(items, schema, range(2, 11), seed=t)]
        non_monotone += int(any(b > a + 1e-9 for a, b in zip(w, w[1:])))
    plain = toy_schema(strings=False)
    recovered = 0
    for seed in range(50):
        brng = np.random.default_rng(seed)
        items, truth = [], []
        for b, (cx, lab) in enumerate([(1.0, "A"), (9.0, "B")]):
            for _ in range(10):
                # blob diameter about 0.05 in entry distance; the blobs sit
                # more than 1.0 apart
                items.append(entry(plain, Cat=lab, Num=cx + brng.uniform(-0.25, 0.25), Cat2="P"))
                truth.append(b)
        labels = kmeans(items, plain, 2, seed=seed).labels
        truth = np.array(truth)
        recovered += int(len(set(labels[truth == 0])) == 1 and len(set(labels[truth == 1])) == 1
                         and labels[0] != labels[-1])
    ok = rising == 0 and non_monotone == 0 and recovered == 50
    record(10, ok, f"k-means: {rising}/100 rising WCSS traces, {non_monotone}/10 non-monotone "
                   f"elbow curves, blob recovery {recovered}/50")
