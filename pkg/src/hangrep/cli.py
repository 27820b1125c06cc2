"""Command-line front end.

Searching works like grep: a pattern, then dictionary files::

    hangrep '⿰?...士' dict.txt

Subcommands handle maintenance and benchmarking::

    hangrep index dict.txt            build dict.txt.eix
    hangrep ingest decomp.tsv         convert character<TAB>ids rows
    hangrep bench gen dict.txt seeds  emit a benchmark query set

Exit status follows the grep convention: 0 when something matched, 1
when nothing did, 2 on errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .eids import EidsTree, intern, leaf, parse_stream, tree, write_cooked
from .errors import HangrepError, QueryError
from .filters import compile_query
from .index import (
    ScanOptions,
    ScanStats,
    build_index,
    default_index_path,
    ingest_tsv,
    load_index,
    scan,
    scan_text,
)

__all__ = ["CliOptions", "run", "bench_gen", "main", "console_main"]


@dataclass
class CliOptions:
    """Everything a search run needs; flags default to the full pipeline."""

    pattern: str | None = None
    pattern_file: str | None = None
    paths: list[str] = field(default_factory=list)
    use_lambda: bool = True
    use_bdd: bool = True
    use_index: bool = True
    memo: str = "auto"
    stats: bool = False
    cooked: bool = False
    bdd_cap: int = 1000
    threads: int = 1


def _parse_pattern(text: str) -> EidsTree:
    trees, diagnostics = parse_stream(text)
    if diagnostics:
        raise QueryError(f"bad pattern {text!r}: {diagnostics[0].message}")
    if len(trees) != 1:
        raise QueryError(f"pattern {text!r} must contain exactly one tree")
    return trees[0]


def _load_needle(options: CliOptions) -> EidsTree:
    if options.pattern_file is not None:
        lines = [
            line
            for line in Path(options.pattern_file).read_text("utf-8").splitlines()
            if line.strip()
        ]
        if not lines:
            raise QueryError(f"{options.pattern_file}: no patterns")
        needle = _parse_pattern(lines[0])
        for line in lines[1:]:
            needle = tree("|", needle, _parse_pattern(line))
        return needle
    if options.pattern is None:
        raise QueryError("no pattern given")
    return _parse_pattern(options.pattern)


def run(options: CliOptions) -> int:
    """Execute a search per ``options``; returns the exit status."""
    needle = _load_needle(options)
    compiled = compile_query(needle, bdd_cap=options.bdd_cap)
    scan_options = ScanOptions(
        use_lambda=options.use_lambda,
        use_bdd=options.use_bdd,
        memo=options.memo,
        threads=options.threads,
        cooked=options.cooked,
    )
    totals = ScanStats()
    matched = 0
    for path in options.paths:
        if path == "-" or not options.use_index:
            if path == "-":
                text = sys.stdin.read()
            else:
                text = Path(path).read_text("utf-8")
            results, stats, diagnostics = scan_text(compiled, text, scan_options)
            for problem in diagnostics:
                print(
                    f"hangrep: {path}: offset {problem.offset}: {problem.message}",
                    file=sys.stderr,
                )
        else:
            index_path = default_index_path(path)
            if not index_path.exists():
                raise HangrepError(
                    f"{path}: no index at {index_path}; run 'hangrep index {path}' "
                    "or pass --no-index"
                )
            index = load_index(index_path)
            results, stats = scan(compiled, index, path, scan_options)
        for line in results:
            print(line)
        matched += stats.tree_hits
        totals.add(stats)
    if options.stats:
        print(f"entries: {totals.entries}", file=sys.stderr)
        print(f"lambda-hits: {totals.lambda_hits}", file=sys.stderr)
        print(f"bdd-hits: {totals.bdd_hits}", file=sys.stderr)
        print(f"tree-hits: {totals.tree_hits}", file=sys.stderr)
        print(f"cpu-seconds: {totals.cpu_seconds:.3f}", file=sys.stderr)
    return 0 if matched else 1


# ── Benchmark query generation ───────────────────────────────────────────


def _strip_inner_heads(node: EidsTree) -> EidsTree:
    if not node.children:
        return node
    return EidsTree(
        node.functor, None, tuple(_strip_inner_heads(c) for c in node.children)
    )


def _leaf_wildcards(node: EidsTree):
    """Yield copies of ``node`` with one leaf replaced by ``?`` each."""
    if not node.children:
        yield tree("?")
        return
    for i, child in enumerate(node.children):
        for variant in _leaf_wildcards(child):
            children = list(node.children)
            children[i] = variant
            yield EidsTree(node.functor, node.head, tuple(children))


def _assoc_insertions(node: EidsTree):
    """Yield copies with ``@`` wrapped around one nested-shape position."""
    if any(
        c.functor is node.functor and len(c.children) == len(node.children)
        for c in node.children
    ):
        yield tree("@", node)
    for i, child in enumerate(node.children):
        for variant in _assoc_insertions(child):
            children = list(node.children)
            children[i] = variant
            yield EidsTree(node.functor, node.head, tuple(children))


def bench_gen(dictionary_text: str, seeds: list[str], pivot: str = "日") -> list[str]:
    """Generate the benchmark query families for a dictionary.

    Eight families, in order, one cooked query per output line:

    1. each seed character on its own;
    2. ``...`` around each seed (match anywhere);
    3. the dictionary entry for each seed, stripped of non-leaf heads;
    4. each stripped entry with each leaf in turn replaced by ``?``,
       duplicates removed;
    5. ``*`` around each stripped entry (children permuted);
    6. ``@`` inserted at each position of a stripped entry where a
       child repeats its parent's functor and arity;
    7. ``|`` replacing each binary stripped entry's root functor;
    8. for each seed x, ``&...x...p`` and ``&...x!...p`` with the fixed
       pivot character p.
    """
    trees, _ = parse_stream(dictionary_text)
    by_head: dict[str, EidsTree] = {}
    for entry in trees:
        if entry.head is not None and entry.head.text not in by_head:
            by_head[entry.head.text] = entry

    queries: list[str] = []
    queries.extend(write_cooked(leaf(seed)) for seed in seeds)
    queries.extend(write_cooked(tree(".", leaf(seed))) for seed in seeds)

    stripped: list[EidsTree] = []
    for seed in seeds:
        entry = by_head.get(seed)
        if entry is not None:
            stripped.append(_strip_inner_heads(entry))
    queries.extend(write_cooked(s) for s in stripped)

    seen: set[str] = set()
    for s in stripped:
        for variant in _leaf_wildcards(s):
            cooked = write_cooked(variant)
            if cooked not in seen:
                seen.add(cooked)
                queries.append(cooked)

    queries.extend(write_cooked(tree("*", s)) for s in stripped)

    for s in stripped:
        queries.extend(write_cooked(v) for v in _assoc_insertions(s))

    for s in stripped:
        if len(s.children) == 2:
            queries.append(write_cooked(EidsTree(intern("|"), None, s.children)))

    for seed in seeds:
        here = tree(".", leaf(seed))
        there = tree(".", leaf(pivot))
        queries.append(write_cooked(tree("&", here, there)))
        queries.append(write_cooked(tree("&", here, tree("!", there))))
    return queries


# ── Argument handling ────────────────────────────────────────────────────


def _search_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hangrep",
        description="Structural search over Han character decomposition "
        "dictionaries.",
    )
    parser.add_argument("args", nargs="*", metavar="PATTERN FILE",
                        help="pattern followed by dictionary files ('-' reads "
                        "stdin and implies --no-index)")
    parser.add_argument("-f", dest="pattern_file", metavar="FILE",
                        help="read patterns from FILE, one per line, matched "
                        "as alternatives")
    parser.add_argument("--no-lambda", action="store_true",
                        help="disable the lambda prefilter")
    parser.add_argument("--no-bdd", action="store_true",
                        help="disable the BDD prefilter")
    parser.add_argument("--no-filter", action="store_true",
                        help="disable both prefilters")
    parser.add_argument("--no-index", action="store_true",
                        help="parse dictionaries directly instead of using "
                        "their indexes")
    parser.add_argument("--memo", choices=("auto", "on", "off"), default="auto",
                        help="memoized matching (default: auto)")
    parser.add_argument("--stats", action="store_true",
                        help="print scan counters to stderr")
    parser.add_argument("--cooked", action="store_true",
                        help="print matches in canonical cooked form")
    parser.add_argument("--bdd-cap", type=int, default=1000, metavar="N",
                        help="BDD node budget per query (default: 1000)")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="scan worker threads (default: 1)")
    return parser


def _cmd_search(argv: list[str]) -> int:
    ns = _search_parser().parse_args(argv)
    options = CliOptions(
        pattern_file=ns.pattern_file,
        use_lambda=not (ns.no_lambda or ns.no_filter),
        use_bdd=not (ns.no_bdd or ns.no_filter),
        use_index=not ns.no_index,
        memo=ns.memo,
        stats=ns.stats,
        cooked=ns.cooked,
        bdd_cap=ns.bdd_cap,
        threads=ns.threads,
    )
    rest = list(ns.args)
    if ns.pattern_file is None:
        if not rest:
            print("hangrep: a pattern is required", file=sys.stderr)
            return 2
        options.pattern = rest.pop(0)
    if not rest:
        print("hangrep: no input files", file=sys.stderr)
        return 2
    options.paths = rest
    return run(options)


def _cmd_index(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="hangrep index")
    parser.add_argument("dictionary")
    parser.add_argument("-o", dest="output", metavar="FILE",
                        help="index path (default: DICTIONARY + '.eix')")
    ns = parser.parse_args(argv)
    index, diagnostics = build_index(ns.dictionary, ns.output)
    for problem in diagnostics:
        print(
            f"hangrep: {ns.dictionary}: offset {problem.offset}: "
            f"{problem.message}",
            file=sys.stderr,
        )
    destination = ns.output or default_index_path(ns.dictionary)
    print(
        f"hangrep: indexed {len(index.records)} entries to {destination}",
        file=sys.stderr,
    )
    return 0


def _cmd_ingest(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="hangrep ingest")
    parser.add_argument("tsv")
    parser.add_argument("-o", dest="output", metavar="FILE",
                        help="dictionary path (default: stdout)")
    ns = parser.parse_args(argv)
    with open(ns.tsv, encoding="utf-8") as fh:
        entries, problems = ingest_tsv(fh)
    for problem in problems:
        print(f"hangrep: {ns.tsv}: {problem}", file=sys.stderr)
    body = "".join(entry + "\n" for entry in entries)
    if ns.output:
        Path(ns.output).write_text(body, "utf-8")
    else:
        sys.stdout.write(body)
    return 0


def _cmd_bench(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="hangrep bench")
    parser.add_argument("action", choices=("gen",))
    parser.add_argument("dictionary")
    parser.add_argument("seedlist")
    parser.add_argument("--pivot", default="日",
                        help="pivot character for the conjunction family")
    parser.add_argument("-o", dest="output", metavar="FILE",
                        help="query list path (default: stdout)")
    ns = parser.parse_args(argv)
    text = Path(ns.dictionary).read_text("utf-8")
    seeds = Path(ns.seedlist).read_text("utf-8").split()
    queries = bench_gen(text, seeds, ns.pivot)
    body = "".join(query + "\n" for query in queries)
    if ns.output:
        Path(ns.output).write_text(body, "utf-8")
    else:
        sys.stdout.write(body)
    return 0


_SUBCOMMANDS = {"index": _cmd_index, "ingest": _cmd_ingest, "bench": _cmd_bench}


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        if args and args[0] in _SUBCOMMANDS:
            return _SUBCOMMANDS[args[0]](args[1:])
        return _cmd_search(args)
    except HangrepError as err:
        print(f"hangrep: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"hangrep: {err}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())
