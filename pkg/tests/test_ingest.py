import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logspace import synth
from logspace.errors import RecordRejected, SchemaError
from logspace.ingest import (Attribute, Domain, FlatLog, LogEntry, Pairs, RawLog, Schema,
                             build_streams, derive_path_fields, fit_schema_stats, flatten,
                             flatten_document, parse_time, project_entry, standardize,
                             standardize_all)

CONFIG = {
    "time_key": "ts",
    "host_key": "host",
    "attributes": [
        {"name": "Base", "domain": "categorical", "source_key": "proc.path", "derivation": "basename"},
        {"name": "Extn", "domain": "categorical", "source_key": "proc.path", "derivation": "extension"},
        {"name": "Level", "domain": "numerical", "source_key": "level"},
        {"name": "Cmd", "domain": "string", "source_key": "cmd"},
    ],
}


def flat(doc):
    pairs = flatten_document(doc)
    return FlatLog(pairs, pairs.get("host"), pairs.get("ts"))


def test_flatten_nested_and_lists():
    doc = {"a": {"b": 1, "c": {"d": "x"}}, "e": [10, {"f": 2}], "g": None}
    assert flatten_document(doc) == {"a.b": 1, "a.c.d": "x", "e.0": 10, "e.1.f": 2, "g": None}


def test_flatten_collisions_get_suffixes():
    # "a.b" written literally collides with the nested a -> b path
    doc = {"a": {"b": 1}, "a.b": 2}
    assert flatten_document(doc) == {"a.b": 1, "a.b_2": 2}
    dup = json.loads('{"k": 1, "k": 2, "k": 3}', object_pairs_hook=Pairs)
    assert flatten_document(dup) == {"k": 1, "k_2": 2, "k_3": 3}


def test_flatten_rawlog_keeps_metadata():
    f = flatten(RawLog({"x": {"y": 1}}, source_host="h1", raw_time=5))
    assert f.pairs == {"x.y": 1} and f.source_host == "h1" and f.raw_time == 5


@given(st.recursive(st.one_of(st.integers(), st.text(max_size=5)),
                    lambda inner: st.dictionaries(st.text("abc", min_size=1, max_size=3), inner,
                                                  max_size=4),
                    max_leaves=20))
@settings(max_examples=200, deadline=None)
def test_flatten_preserves_leaf_count(doc):
    def leaves(node):
        if isinstance(node, dict):
            return sum(leaves(v) for v in node.values()) if node else 0
        return 1
    flat_doc = flatten_document(doc)
    if isinstance(doc, dict):
        assert len(flat_doc) == leaves(doc)
        assert all(not isinstance(v, dict) for v in flat_doc.values())


@pytest.mark.parametrize("path,expected", [
    ("C:\\Windows\\explorer.exe", ("EXPLORER", "EXE")),
    ("C:\\Users\\hostX\\AppData\\Local\\Temp\\Low\\4328.tmp", ("4328", "TMP")),
    ("C:\\Windows\\System32\\Macromed\\Flash\\FlashUtil64_19_0_0_185_ActiveX.exe",
     ("FLASHUTIL64_19_0_0_185_ACTIVEX", "EXE")),
    ("noext", ("NOEXT", "")),
    ("/usr/bin/python3.10", ("PYTHON3", "10")),
])
def test_derive_path_fields(path, expected):
    assert derive_path_fields(path) == expected


def test_parse_time():
    assert parse_time(1446532736) == 1446532736.0
    assert parse_time("1446532736.5") == 1446532736.5
    assert parse_time("2015-11-03T06:38:56Z") == 1446532736.0
    assert parse_time("2015-11-03T07:38:56+01:00") == 1446532736.0
    assert parse_time("2015-11-03T06:38:56.250000Z") == 1446532736.25
    assert parse_time("2015-11-03T06:38:56") == 1446532736.0
    for bad, reason in [(None, "missing time"), ("yesterday", "malformed time"),
                        (True, "malformed time"), ("nan", "malformed time"), ({}, "malformed time")]:
        with pytest.raises(RecordRejected, match=reason):
            parse_time(bad)


def test_schema_validation():
    with pytest.raises(SchemaError):
        Attribute("x", Domain.CATEGORICAL, "x", vocabulary=("A",))
    with pytest.raises(SchemaError):
        Attribute("x", Domain.NUMERICAL, "x", x_min=3, x_max=1)
    with pytest.raises(SchemaError):
        Attribute("x", Domain.CATEGORICAL, "x", derivation="stem")
    with pytest.raises(SchemaError):
        Schema.from_dict({"attributes": [{"name": "a", "domain": "color"}], "time_key": "t"})
    with pytest.raises(SchemaError):
        Schema.from_dict({"attributes": []})
    with pytest.raises(SchemaError, match="unknown attributes"):
        Schema.from_dict(CONFIG).project(["Nope"])


def test_fit_and_standardize():
    schema = Schema.from_dict(CONFIG)
    docs = [
        {"ts": 30, "host": "h1", "proc": {"path": "C:\\a\\explorer.exe"}, "level": 3, "cmd": "x"},
        {"ts": 10, "host": "h1", "proc": {"path": "C:\\a\\8D6.tmp"}, "level": "1"},
        {"ts": 20, "host": "h2", "other": 1},  # no schema key: discarded
        {"ts": 40, "host": "h2", "level": 2},
        {"host": "h2", "level": 2},  # missing time
        {"ts": 50, "host": "h2", "level": "high"},  # non-numeric
    ]
    flats = [flat(d) for d in docs]
    with pytest.raises(SchemaError, match="not fitted"):
        standardize(flats[0], schema)
    fitted = fit_schema_stats(flats, schema)
    base, extn, level, _ = fitted.attributes
    assert base.vocabulary == (None, "EXPLORER", "8D6")
    assert extn.vocabulary == (None, "EXE", "TMP")
    assert (level.x_min, level.x_max) == (1.0, 3.0)
    pairs, diag = standardize_all(flats, fitted)
    assert diag == {"discarded": 1, "missing time": 1, "non-numeric value for Level": 1}
    assert [h for h, _ in pairs] == ["h1", "h1", "h2"]
    e = pairs[2][1]
    # absent categoricals land in the null slot, absent strings are empty
    assert e.values[0][0] == 1.0 and e.values[1][0] == 1.0
    assert e.values[2] == 2.0 and e.values[3] == ""
    streams = build_streams(pairs)
    assert [s.host for s in streams] == ["h1", "h2"]
    assert list(streams[0].times) == [10.0, 30.0]


def test_fit_errors():
    schema = Schema.from_dict(CONFIG)
    with pytest.raises(SchemaError, match="no records"):
        fit_schema_stats([], schema)
    with pytest.raises(SchemaError, match="no numerical values for attribute Level"):
        fit_schema_stats([flat({"ts": 1, "cmd": "x"})], schema)


def test_unseen_label_maps_to_null():
    attr = Attribute("c", Domain.CATEGORICAL, "c", vocabulary=(None, "A"))
    assert list(attr.one_hot("ZZZ")) == [1.0, 0.0]
    assert list(attr.one_hot("A")) == [0.0, 1.0]


def test_schema_round_trip():
    schema = Schema.from_dict(CONFIG)
    fitted = fit_schema_stats([flat({"ts": 1, "proc": {"path": "a.b"}, "level": 4})], schema)
    again = Schema.from_dict(json.loads(json.dumps(fitted.to_dict())))
    assert again.to_dict() == fitted.to_dict()
    assert again.attributes == fitted.attributes


def test_build_streams_stable_for_equal_times():
    a, b = LogEntry(5.0, (1.0,)), LogEntry(5.0, (2.0,))
    s = build_streams([("h", a), ("h", b), ("g", LogEntry(1.0, (0.0,)))])
    assert [x.host for x in s] == ["g", "h"]
    assert s[1].entries == [a, b]


def test_project_entry():
    schema = Schema.from_dict(CONFIG)
    e = LogEntry(0.0, ("b", "x", 1.0, "s"))
    assert project_entry(e, schema, ["Level", "Cmd"]).values == (1.0, "s")
    assert schema.project(["Cmd", "Base"]).names == ["Base", "Cmd"]


def test_synthetic_corpus_process_share():
    docs, _ = synth.detection_corpus(seed=0)
    schema = Schema.from_dict(synth.schema_config())
    flats = [flatten(RawLog(d)) for d in docs]
    flats = [FlatLog(f.pairs, f.pairs[synth.HOST_KEY], f.pairs[synth.TIME_KEY]) for f in flats]
    pairs, diag = standardize_all(flats, fit_schema_stats(flats, schema))
    share = len(pairs) / len(docs)
    # non-process events carry no schema key and are dropped
    assert diag["discarded"] == len(docs) - len(pairs)
    assert 0.80 < share < 0.88
