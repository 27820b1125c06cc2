"""Persistent signature index over a dictionary file, and scanning.

A dictionary is a UTF-8 text file of EIDS trees, normally one per line.
Its index holds one 28-byte record per tree (the 16-byte signature
vector, then the tree's byte offset (u64) and byte length (u32), all
little-endian) behind a fixed header::

    magic "EIX1" | version u16 | dict checksum u64 | dict size u64 | count u32

The checksum is 64-bit FNV-1a over the entire dictionary file; a scan
refuses to run when checksum or size disagree with the dictionary on
disk, since offsets into a changed file would be garbage.  Rebuilding
from the same dictionary bytes reproduces the index byte for byte.

Scanning walks the records through up to three stages: the lambda
filter, then the BDD, and only for survivors the step of reading, parsing,
and tree-matching the entry's byte span.  Either filter stage can be
switched off; a disabled stage passes everything through and its
counter then just repeats the previous stage's count.
"""

from __future__ import annotations

import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bitvec import Vec128, fnv1a64, lambda_check, vec
from .eids import (
    EidsTree,
    ParseDiagnostic,
    StreamParser,
    intern,
    parse_stream,
    write_cooked,
)
from .errors import IndexFormatError, StaleIndexError
from .filters import CompiledQuery
from .matching import MatchContext, match

__all__ = [
    "INDEX_SUFFIX",
    "IndexRecord",
    "IndexFile",
    "build_index",
    "load_index",
    "save_index",
    "default_index_path",
    "ScanOptions",
    "ScanStats",
    "scan",
    "scan_text",
    "ingest_tsv",
]

INDEX_SUFFIX = ".eix"

_MAGIC = b"EIX1"
_VERSION = 1
_HEADER = struct.Struct("<4sHQQI")
_RECORD = struct.Struct("<16sQI")


@dataclass(frozen=True, slots=True)
class IndexRecord:
    """One indexed tree: signature vector plus its byte span."""

    vector: Vec128
    offset: int
    length: int


@dataclass
class IndexFile:
    """A parsed index: header fields and records in dictionary order."""

    checksum: int
    dict_size: int
    records: list[IndexRecord]
    version: int = _VERSION

    def is_fresh(self, dictionary_data: bytes) -> bool:
        return (
            len(dictionary_data) == self.dict_size
            and fnv1a64(dictionary_data) == self.checksum
        )


def default_index_path(dictionary_path: str | Path) -> Path:
    return Path(str(dictionary_path) + INDEX_SUFFIX)


def build_index(
    dictionary_path: str | Path,
    index_path: str | Path | None = None,
) -> tuple[IndexFile, list[ParseDiagnostic]]:
    """Index a dictionary file, writing the result next to it by default.

    Entries that fail to parse are reported in the returned diagnostics
    and simply have no record; everything parseable is indexed.
    """
    data = Path(dictionary_path).read_bytes()
    parser = StreamParser(data.decode("utf-8"))
    records = [
        IndexRecord(vec(tree), start, end - start) for tree, start, end in parser
    ]
    index = IndexFile(fnv1a64(data), len(data), records)
    save_index(index, index_path or default_index_path(dictionary_path))
    return index, parser.diagnostics


def save_index(index: IndexFile, path: str | Path) -> None:
    parts = [
        _HEADER.pack(
            _MAGIC, index.version, index.checksum, index.dict_size, len(index.records)
        )
    ]
    for record in index.records:
        parts.append(
            _RECORD.pack(record.vector.to_bytes(), record.offset, record.length)
        )
    Path(path).write_bytes(b"".join(parts))


def load_index(path: str | Path) -> IndexFile:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise IndexFormatError(f"{path}: truncated header")
    magic, version, checksum, dict_size, count = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    if version != _VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")
    body = data[_HEADER.size:]
    if len(body) != count * _RECORD.size:
        raise IndexFormatError(f"{path}: expected {count} records")
    records = [
        IndexRecord(Vec128.from_bytes(raw), offset, length)
        for raw, offset, length in _RECORD.iter_unpack(body)
    ]
    return IndexFile(checksum, dict_size, records, version)


# ── Scanning ─────────────────────────────────────────────────────────────


@dataclass
class ScanOptions:
    """Knobs for a scan; the defaults run the full pipeline."""

    use_lambda: bool = True
    use_bdd: bool = True
    memo: str = "auto"  # "auto" | "on" | "off"
    threads: int = 1
    cooked: bool = False


@dataclass
class ScanStats:
    """Counters from one scan; stages keep entries in dictionary order."""

    entries: int = 0
    lambda_hits: int = 0
    bdd_hits: int = 0
    tree_hits: int = 0
    wall_seconds: float = 0.0
    cpu_seconds: float = 0.0

    def add(self, other: "ScanStats") -> None:
        self.entries += other.entries
        self.lambda_hits += other.lambda_hits
        self.bdd_hits += other.bdd_hits
        self.tree_hits += other.tree_hits
        self.wall_seconds += other.wall_seconds
        self.cpu_seconds += other.cpu_seconds


def _memo_flag(query: CompiledQuery, options: ScanOptions) -> bool:
    if options.memo == "on":
        return True
    if options.memo == "off":
        return False
    return query.memoize


def _scan_records(
    query: CompiledQuery,
    records: list[IndexRecord],
    data: bytes,
    options: ScanOptions,
) -> tuple[list[str], ScanStats]:
    stats = ScanStats()
    out: list[str] = []
    needle = query.needle
    mask = query.lam.mask.bits
    lam = query.lam.lam
    bdd = query.bdd
    use_lambda = options.use_lambda
    use_bdd = options.use_bdd
    ctx = MatchContext(memoize=_memo_flag(query, options))
    for record in records:
        stats.entries += 1
        bits = record.vector.bits
        if use_lambda and not (mask & bits).bit_count() > lam:
            continue
        stats.lambda_hits += 1
        if use_bdd and not bdd.evaluate(bits):
            continue
        stats.bdd_hits += 1
        text = data[record.offset:record.offset + record.length].decode("utf-8")
        trees, _ = parse_stream(text)
        if len(trees) != 1:
            raise IndexFormatError(
                f"record at offset {record.offset} does not span one tree"
            )
        if match(needle, trees[0], ctx):
            stats.tree_hits += 1
            out.append(write_cooked(trees[0]) if options.cooked else text)
    return out, stats


def scan(
    query: CompiledQuery,
    index: IndexFile,
    dictionary_path: str | Path,
    options: ScanOptions | None = None,
) -> tuple[list[str], ScanStats]:
    """Run ``query`` over an indexed dictionary.

    Returns the matching entry texts in dictionary order and the scan
    counters.  Raises :class:`StaleIndexError` when the index does not
    describe the current dictionary bytes.
    """
    options = options or ScanOptions()
    data = Path(dictionary_path).read_bytes()
    if not index.is_fresh(data):
        raise StaleIndexError(
            f"index is stale for {dictionary_path}; rebuild it from the "
            "current dictionary"
        )
    started_wall = time.perf_counter()
    started_cpu = time.process_time()
    if options.threads > 1 and len(index.records) > 1:
        chunk = (len(index.records) + options.threads - 1) // options.threads
        pieces = [
            index.records[i:i + chunk]
            for i in range(0, len(index.records), chunk)
        ]
        out: list[str] = []
        stats = ScanStats()
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            results = pool.map(
                lambda part: _scan_records(query, part, data, options), pieces
            )
            for part_out, part_stats in results:
                out.extend(part_out)
                stats.add(part_stats)
    else:
        out, stats = _scan_records(query, index.records, data, options)
    stats.wall_seconds = time.perf_counter() - started_wall
    stats.cpu_seconds = time.process_time() - started_cpu
    return out, stats


def scan_text(
    query: CompiledQuery,
    text: str,
    options: ScanOptions | None = None,
) -> tuple[list[str], ScanStats, list[ParseDiagnostic]]:
    """Scan raw dictionary text without an index.

    Every tree is parsed and matched; the bit filters need precomputed
    vectors and so do not apply here.  The filter-stage counters report
    pass-through values.
    """
    options = options or ScanOptions()
    stats = ScanStats()
    out: list[str] = []
    started_wall = time.perf_counter()
    started_cpu = time.process_time()
    ctx = MatchContext(memoize=_memo_flag(query, options))
    parser = StreamParser(text)
    encoded = text.encode("utf-8")
    for tree, start, end in parser:
        stats.entries += 1
        stats.lambda_hits += 1
        stats.bdd_hits += 1
        if match(query.needle, tree, ctx):
            stats.tree_hits += 1
            if options.cooked:
                out.append(write_cooked(tree))
            else:
                out.append(encoded[start:end].decode("utf-8"))
    stats.wall_seconds = time.perf_counter() - started_wall
    stats.cpu_seconds = time.process_time() - started_cpu
    return out, stats, parser.diagnostics


# ── TSV ingestion ────────────────────────────────────────────────────────


def ingest_tsv(lines) -> tuple[list[str], list[str]]:
    """Convert rows of ``character TAB ids`` into cooked dictionary entries.

    The ids field must parse to exactly one tree; the character becomes
    (or replaces) the root head.  Returns the cooked entry texts and a
    list of human-readable problems for the rows that were skipped.
    """
    entries: list[str] = []
    problems: list[str] = []
    for number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        character, sep, ids = line.partition("\t")
        if not sep or not character or not ids:
            problems.append(f"row {number}: expected 'character<TAB>ids'")
            continue
        trees, diagnostics = parse_stream(ids)
        if diagnostics or len(trees) != 1:
            reason = diagnostics[0].message if diagnostics else f"{len(trees)} trees"
            problems.append(f"row {number}: bad ids field ({reason})")
            continue
        entry = trees[0]
        entries.append(
            write_cooked(EidsTree(entry.functor, intern(character), entry.children))
        )
    return entries, problems
