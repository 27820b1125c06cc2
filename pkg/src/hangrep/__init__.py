"""Structural search over Han character decomposition dictionaries.

The package parses EIDS trees (a superset of Unicode ideographic
description sequences), matches structural queries against them, and
accelerates dictionary scans with hashed bit-vector signatures filtered
by lambda thresholds and small monotone BDDs.
"""

from .bdd import BddFunction, BddStore
from .bitvec import (
    LambdaFilter,
    Vec128,
    fnv1a64,
    hash_triple,
    lambda_and,
    lambda_check,
    lambda_or,
    lambda_remap,
    triple_mask,
    vec,
)
from .cli import CliOptions, bench_gen, main, run
from .eids import (
    FATAL,
    RECOVERABLE,
    SUGARY_FUNCTORS,
    EidsTree,
    ParseDiagnostic,
    StreamParser,
    Symbol,
    alias_table,
    intern,
    leaf,
    load_aliases,
    parse_stream,
    tree,
    write_cooked,
)
from .errors import (
    HangrepError,
    IndexFormatError,
    QueryError,
    StaleIndexError,
    UnsupportedOperatorError,
)
from .filters import CompiledQuery, compile_query, normalize_not
from .index import (
    IndexFile,
    IndexRecord,
    ScanOptions,
    ScanStats,
    build_index,
    default_index_path,
    ingest_tsv,
    load_index,
    scan,
    scan_text,
)
from .matching import MatchContext, flatten, match, match_assoc, should_memoize

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Symbol",
    "intern",
    "EidsTree",
    "tree",
    "leaf",
    "ParseDiagnostic",
    "RECOVERABLE",
    "FATAL",
    "StreamParser",
    "parse_stream",
    "write_cooked",
    "SUGARY_FUNCTORS",
    "alias_table",
    "load_aliases",
    "MatchContext",
    "match",
    "match_assoc",
    "flatten",
    "should_memoize",
    "Vec128",
    "LambdaFilter",
    "fnv1a64",
    "hash_triple",
    "triple_mask",
    "vec",
    "lambda_check",
    "lambda_or",
    "lambda_and",
    "lambda_remap",
    "BddStore",
    "BddFunction",
    "CompiledQuery",
    "compile_query",
    "normalize_not",
    "IndexFile",
    "IndexRecord",
    "build_index",
    "load_index",
    "default_index_path",
    "ScanOptions",
    "ScanStats",
    "scan",
    "scan_text",
    "ingest_tsv",
    "CliOptions",
    "run",
    "bench_gen",
    "main",
    "HangrepError",
    "QueryError",
    "UnsupportedOperatorError",
    "IndexFormatError",
    "StaleIndexError",
]
