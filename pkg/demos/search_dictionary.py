"""Index a small dictionary and run a few structural queries over it.

Equivalent shell session:

    hangrep index chars.eids
    hangrep --stats '...士' chars.eids
"""

import tempfile
from pathlib import Path

from hangrep import ScanOptions, build_index, compile_query, parse_stream, scan

DICTIONARY = """\
【結】⿰糸【吉】⿱士口
【吉】⿱士口
【語】⿰言【吾】⿱五口
【明】⿰日月
【志】⿱士心
【仕】⿰亻士
士
"""

workdir = Path(tempfile.mkdtemp())
path = workdir / "chars.eids"
path.write_text(DICTIONARY, encoding="utf-8")

index, diagnostics = build_index(path)
assert not diagnostics
print(f"indexed {len(index.records)} entries\n")

QUERIES = [
    "...士",        # 士 anywhere in the decomposition
    "⿱士?",        # 士 over anything
    "&...士...口",  # both 士 and 口 somewhere
    "⿰?⿱士口",    # right half is 吉, left half is anything
    "!...士",       # entries with no 士 at all
]

for query_text in QUERIES:
    (needle,), _ = parse_stream(query_text)
    compiled = compile_query(needle)
    lines, stats = scan(compiled, index, path, options=ScanOptions())
    hits = " ".join(lines) if lines else "(none)"
    print(f"{query_text:12} -> {hits}")
    print(f"{'':12}    funnel {stats.entries} entries "
          f"-> {stats.lambda_hits} lambda -> {stats.bdd_hits} bdd "
          f"-> {stats.tree_hits} matched")
