"""Metric-space embedding of semi-structured host logs.

Entries are compared attribute-wise (total variation for categories,
range-normalized difference for numbers, normalized edit distance for
strings) and combined with an l2 norm; streams are compared by mean
positional entry distance. Detection, classification and clustering build on
those distances.
"""
from ._kernels import BACKEND
from .aggregate import Centroid, centroid, centroid_to_dict, d_to_centroid, stream_variance, variance
from .detect import (Alert, DetectorState, Signature, cross_correlate, detect,
                     extract_signature, online_pvalue, scan)
from .errors import LogSpaceError, RecordRejected, SchemaError
from .ingest import (Attribute, Domain, FlatLog, LogEntry, LogStream, RawLog, Schema,
                     build_streams, derive_path_fields, fit_schema_stats, flatten,
                     flatten_document, standardize, standardize_all)
from .metrics import (cross_distances, d_categorical, d_entry, d_numerical, d_stream_seq,
                      d_stream_time, d_string, interpolate_entry, lev)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Alert", "Attribute", "Centroid", "DetectorState", "Domain", "FlatLog",
    "LogEntry", "LogSpaceError", "LogStream", "RawLog", "RecordRejected", "Schema",
    "SchemaError", "Signature", "build_streams", "centroid", "centroid_to_dict",
    "cross_correlate", "cross_distances", "d_categorical", "d_entry", "d_numerical",
    "d_stream_seq", "d_stream_time", "d_string", "d_to_centroid", "derive_path_fields",
    "detect", "extract_signature", "fit_schema_stats", "flatten", "flatten_document",
    "interpolate_entry", "lev", "online_pvalue", "scan", "standardize",
    "standardize_all", "stream_variance", "variance",
]
