"""Index format, staleness, scanning pipeline, TSV ingestion."""

import struct

import pytest

from conftest import parse_one
from hangrep import (
    IndexFormatError,
    ScanOptions,
    StaleIndexError,
    build_index,
    compile_query,
    default_index_path,
    fnv1a64,
    ingest_tsv,
    load_index,
    scan,
    scan_text,
    vec,
    write_cooked,
)
from treegen import synthetic_dictionary

DICT = "【結】⿰糸⿱士口\n【吉】⿱士口\n【語】⿰言⿱五口\n【明】⿰日月\n士\n"

_HEADER = struct.Struct("<4sHQQI")


@pytest.fixture
def dict_path(tmp_path):
    path = tmp_path / "chars.eids"
    path.write_text(DICT, encoding="utf-8")
    return path


def q(text: str):
    return compile_query(parse_one(text))


# ── format ───────────────────────────────────────────────────────────────


def test_build_load_round_trip(dict_path):
    built, diagnostics = build_index(dict_path)
    assert not diagnostics
    assert default_index_path(dict_path).exists()
    loaded = load_index(default_index_path(dict_path))
    assert loaded == built
    assert len(loaded.records) == 5


def test_header_layout(dict_path):
    build_index(dict_path)
    raw = default_index_path(dict_path).read_bytes()
    magic, version, checksum, dict_size, count = _HEADER.unpack_from(raw)
    data = dict_path.read_bytes()
    assert magic == b"EIX1"
    assert version == 1
    assert checksum == fnv1a64(data)
    assert dict_size == len(data)
    assert count == 5
    assert len(raw) == _HEADER.size + 28 * count


def test_records_carry_exact_spans_and_vectors(dict_path):
    index, _ = build_index(dict_path)
    data = dict_path.read_bytes()
    lines = [line for line in DICT.splitlines() if line]
    for record, line in zip(index.records, lines):
        span = data[record.offset:record.offset + record.length].decode("utf-8")
        assert span == line
        assert record.vector == vec(parse_one(line))


def test_rebuild_is_byte_identical(dict_path, tmp_path):
    build_index(dict_path, tmp_path / "a.eix")
    build_index(dict_path, tmp_path / "b.eix")
    assert (tmp_path / "a.eix").read_bytes() == (tmp_path / "b.eix").read_bytes()


def test_whitespace_edits_keep_vectors(dict_path, tmp_path):
    index, _ = build_index(dict_path)
    shifted_path = tmp_path / "shifted.eids"
    shifted_path.write_text("\n " + DICT.replace("\n", "  \n", 2), encoding="utf-8")
    shifted, diagnostics = build_index(shifted_path)
    assert not diagnostics
    assert len(shifted.records) == len(index.records)
    for before, after in zip(index.records, shifted.records):
        assert before.vector == after.vector
    assert shifted.records[0].offset == index.records[0].offset + 2


def test_load_rejects_malformed_files(tmp_path, dict_path):
    target = tmp_path / "broken.eix"

    target.write_bytes(b"EIX1")
    with pytest.raises(IndexFormatError):
        load_index(target)

    build_index(dict_path, target)
    good = target.read_bytes()

    target.write_bytes(b"XXXX" + good[4:])
    with pytest.raises(IndexFormatError):
        load_index(target)

    target.write_bytes(good[:4] + b"\x63\x00" + good[6:])
    with pytest.raises(IndexFormatError):
        load_index(target)

    target.write_bytes(good[:-1])  # record area no longer matches count
    with pytest.raises(IndexFormatError):
        load_index(target)


def test_build_skips_unparseable_lines(tmp_path):
    path = tmp_path / "bad.eids"
    path.write_text("⿰日月\n⿱士\n語\n", encoding="utf-8")
    index, diagnostics = build_index(path)
    assert len(index.records) == 2
    assert len(diagnostics) == 1
    out, stats = scan(q("?"), index, path)
    assert out == ["⿰日月", "語"]
    assert stats.entries == 2


# ── scanning ─────────────────────────────────────────────────────────────


def test_scan_basics(dict_path):
    index, _ = build_index(dict_path)
    out, stats = scan(q("...士"), index, dict_path)
    assert out == ["【結】⿰糸⿱士口", "【吉】⿱士口", "士"]
    assert stats.entries == 5
    assert stats.entries >= stats.lambda_hits >= stats.bdd_hits >= stats.tree_hits
    assert stats.tree_hits == 3
    assert stats.wall_seconds >= 0.0 and stats.cpu_seconds >= 0.0


def test_scan_no_matches(dict_path):
    index, _ = build_index(dict_path)
    out, stats = scan(q("...王"), index, dict_path)
    assert out == []
    assert stats.tree_hits == 0


def test_disabled_stages_pass_through(dict_path):
    index, _ = build_index(dict_path)
    query = q("⿰糸⿱士口")
    _, full = scan(query, index, dict_path)
    _, no_lam = scan(query, index, dict_path, ScanOptions(use_lambda=False))
    assert no_lam.lambda_hits == no_lam.entries
    assert no_lam.tree_hits == full.tree_hits
    _, no_bdd = scan(query, index, dict_path, ScanOptions(use_bdd=False))
    assert no_bdd.bdd_hits == no_bdd.lambda_hits
    _, none = scan(
        query, index, dict_path, ScanOptions(use_lambda=False, use_bdd=False)
    )
    assert none.lambda_hits == none.entries == none.bdd_hits
    assert none.tree_hits == full.tree_hits


def test_filter_configs_agree_on_results(tmp_path):
    text, seeds = synthetic_dictionary(300, seed=5)
    path = tmp_path / "rand.eids"
    path.write_text(text, encoding="utf-8")
    index, _ = build_index(path)
    queries = ["...士", f"...{seeds[0]}", seeds[1], "⿰??", f"&...{seeds[0]}?"]
    for text_q in queries:
        query = q(text_q)
        expected, _ = scan(
            query, index, path, ScanOptions(use_lambda=False, use_bdd=False)
        )
        for options in (
            ScanOptions(),
            ScanOptions(use_lambda=False),
            ScanOptions(use_bdd=False),
        ):
            out, _ = scan(query, index, path, options)
            assert out == expected, text_q


def test_scan_matches_scan_text(dict_path):
    index, _ = build_index(dict_path)
    for text_q in ("...士", "?", "⿰糸⿱士口", "...王"):
        query = q(text_q)
        indexed, istats = scan(query, index, dict_path)
        direct, dstats, diagnostics = scan_text(query, DICT)
        assert not diagnostics
        assert indexed == direct
        assert istats.entries == dstats.entries
        assert dstats.lambda_hits == dstats.bdd_hits == dstats.entries
        assert istats.tree_hits == dstats.tree_hits


def test_multiple_trees_per_line(tmp_path):
    path = tmp_path / "pair.eids"
    path.write_text("⿰日月 ⿱五口\n", encoding="utf-8")
    index, _ = build_index(path)
    assert len(index.records) == 2
    out, _ = scan(q("...五"), index, path)
    assert out == ["⿱五口"]


def test_stale_index_refused(dict_path):
    index, _ = build_index(dict_path)
    dict_path.write_text(DICT + "月\n", encoding="utf-8")
    with pytest.raises(StaleIndexError):
        scan(q("?"), index, dict_path)
    # Same length, different bytes: the checksum still catches it.
    rebuilt, _ = build_index(dict_path)
    dict_path.write_text(DICT + "日\n", encoding="utf-8")
    assert len(dict_path.read_bytes()) == rebuilt.dict_size
    with pytest.raises(StaleIndexError):
        scan(q("?"), rebuilt, dict_path)
    final, _ = build_index(dict_path)
    out, _ = scan(q("...日"), final, dict_path)
    assert out == ["【明】⿰日月", "日"]


def test_threads_equal_serial(tmp_path):
    text, seeds = synthetic_dictionary(500, seed=9)
    path = tmp_path / "rand.eids"
    path.write_text(text, encoding="utf-8")
    index, _ = build_index(path)
    query = q(f"...{seeds[0]}")
    serial, sstats = scan(query, index, path)
    for threads in (2, 3, 8):
        parallel, pstats = scan(query, index, path, ScanOptions(threads=threads))
        assert parallel == serial
        assert (pstats.entries, pstats.lambda_hits, pstats.bdd_hits, pstats.tree_hits) == (
            sstats.entries,
            sstats.lambda_hits,
            sstats.bdd_hits,
            sstats.tree_hits,
        )


def test_memo_modes_agree(tmp_path):
    text, seeds = synthetic_dictionary(300, seed=13)
    path = tmp_path / "rand.eids"
    path.write_text(text, encoding="utf-8")
    index, _ = build_index(path)
    query = q(f"...&...{seeds[0]}...{seeds[1]}")
    outputs = [
        scan(query, index, path, ScanOptions(memo=mode))[0]
        for mode in ("auto", "on", "off")
    ]
    assert outputs[0] == outputs[1] == outputs[2]


def test_cooked_output(tmp_path):
    path = tmp_path / "raw.eids"
    path.write_text("<結>[lr]糸<吉>⿱士口\n", encoding="utf-8")
    index, _ = build_index(path)
    raw, _ = scan(q("...士"), index, path)
    assert raw == ["<結>[lr]糸<吉>⿱士口"]
    cooked, _ = scan(q("...士"), index, path, ScanOptions(cooked=True))
    assert cooked == ["【結】⿰糸【吉】⿱士口"]


# ── TSV ingestion ────────────────────────────────────────────────────────


def test_ingest_tsv_basics():
    rows = [
        "結\t⿰糸⿱士口\n",
        "吉\t<x>⿱士口\n",
        "",
        "士\t士\n",
    ]
    entries, problems = ingest_tsv(rows)
    assert problems == []
    assert entries == ["【結】⿰糸⿱士口", "【吉】⿱士口", "士"]


def test_ingest_tsv_replaces_existing_root_head():
    entries, problems = ingest_tsv(["明\t【別】⿰日月"])
    assert entries == ["【明】⿰日月"]
    assert problems == []


def test_ingest_tsv_reports_bad_rows():
    rows = [
        "結 ⿰糸⿱士口",  # no tab
        "\t⿱士口",  # empty character
        "吉\t",  # empty ids
        "語\t日 月",  # two trees
        "明\t(ab",  # parse error
        "好\t⿰女子",
    ]
    entries, problems = ingest_tsv(rows)
    assert entries == ["【好】⿰女子"]
    assert len(problems) == 5
    assert problems[0].startswith("row 1:")
    assert problems[4].startswith("row 5:")
