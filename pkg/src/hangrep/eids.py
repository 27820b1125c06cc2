"""EIDS trees, symbol interning, the text syntax, and the cooked serializer.

An EIDS (extended ideographic description sequence) is an ordered tree in
which every node carries a *functor* (a non-empty string naming the node)
and at most one optional *head* (a string naming what the subtree
describes, typically a single Han character).  Nodes have zero to three
children; the child count is called the node's *arity*.

The text syntax, briefly:

* Explicit functor brackets select arity: ``(x)`` arity 0, ``.x.``
  arity 1, ``[x]`` arity 2, ``{x}`` arity 3.  A child tree follows the
  functor for each slot of its arity.
* ``<h>`` or ``【h】`` immediately before a functor attaches head ``h``.
* Inside any bracketed string a backslash quotes the next character.  If
  the closing bracket occurs immediately after the opening bracket it is
  taken literally as the first character of the string instead of closing
  it; the practical payoff is that ``...`` spells a unary functor whose
  name is a single dot.
* The twelve ideographic description characters U+2FF0..U+2FFB and the
  matching-operator characters ``? ! * = @ / # & |`` are *sugary*: bare,
  they act as pre-bracketed functors of their natural arity.
* Any other character ``c`` standing where a tree is expected is
  *syrupy*: it abbreviates ``<c>(;)``, a leaf with head ``c`` and
  functor ``;``.
* A backslash at tree level quotes the next character into syrupy form.

``parse_stream`` never raises on malformed text.  Errors are reported as
diagnostics; a recoverable error discards input to the end of the line
and parsing resumes, so one bad dictionary entry cannot hide the rest of
the file.  Only an unterminated bracketed string (or a dangling escape)
at end of input is fatal, and even then the trees already parsed are
returned.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from importlib import resources
from typing import Iterator

__all__ = [
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
]


class Symbol:
    """An interned string with identity equality.

    Symbols are created only through :func:`intern`, which returns the
    same object for equal text, so equality and hashing never touch the
    text itself (the default object semantics are exactly what we want).
    """

    __slots__ = ("id", "text")

    def __init__(self, ident: int, text: str):
        self.id = ident
        self.text = text

    def __repr__(self) -> str:
        return f"Symbol({self.text!r})"


class _SymbolTable:
    # Single writer at a time; the lock keeps concurrent parses safe.
    def __init__(self) -> None:
        self._by_text: dict[str, Symbol] = {}
        self._lock = threading.Lock()

    def intern(self, text: str) -> Symbol:
        sym = self._by_text.get(text)
        if sym is not None:
            return sym
        if not text:
            raise ValueError("symbol text must be non-empty")
        with self._lock:
            sym = self._by_text.get(text)
            if sym is None:
                sym = Symbol(len(self._by_text), text)
                self._by_text[text] = sym
        return sym


_TABLE = _SymbolTable()


def intern(text: str) -> Symbol:
    """Intern ``text`` and return its unique :class:`Symbol`."""
    return _TABLE.intern(text)


_SEMICOLON = intern(";")


@dataclass(frozen=True, slots=True)
class EidsTree:
    """An immutable EIDS node: functor, optional head, 0..3 children."""

    functor: Symbol
    head: Symbol | None = None
    children: tuple["EidsTree", ...] = ()

    def __post_init__(self) -> None:
        if len(self.children) > 3:
            raise ValueError("a node has at most three children")

    @property
    def arity(self) -> int:
        return len(self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def walk(self) -> Iterator["EidsTree"]:
        """Yield this node and every descendant in pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __repr__(self) -> str:
        return f"EidsTree({write_cooked(self)!r})"


def tree(functor: str, *children: EidsTree, head: str | None = None) -> EidsTree:
    """Convenience constructor working on plain strings."""
    return EidsTree(
        intern(functor),
        intern(head) if head is not None else None,
        tuple(children),
    )


def leaf(head: str) -> EidsTree:
    """The leaf a bare character abbreviates: head ``head``, functor ``;``."""
    return EidsTree(_SEMICOLON, intern(head), ())


# ── Syntax tables ────────────────────────────────────────────────────────

_FUNCTOR_OPENERS = {"(": 0, ".": 1, "[": 2, "{": 3}
_FUNCTOR_CLOSERS = {"(": ")", ".": ".", "[": "]", "{": "}"}
_WRITE_BRACKETS = {0: ("(", ")"), 1: (".", "."), 2: ("[", "]"), 3: ("{", "}")}
_HEAD_OPENERS = {"<": ">", "【": "】"}

#: Bare characters that act as pre-bracketed functors, with their arity.
SUGARY_FUNCTORS: dict[str, int] = {
    "⿰": 2, "⿱": 2, "⿲": 3, "⿳": 3, "⿴": 2, "⿵": 2,
    "⿶": 2, "⿷": 2, "⿸": 2, "⿹": 2, "⿺": 2, "⿻": 2,
    "?": 0,
    "!": 1, "*": 1, "=": 1, "@": 1, "/": 1, "#": 1,
    "&": 2, "|": 2,
}

_WHITESPACE = " \t\r\n"
_CHILD_SKIP = " \t"
_BRACKET_CHARS = "()[]{}<>.【】"

# Characters a bare leaf may not consist of: anything with syntactic
# meaning, plus whitespace.
_NOT_BARE = set(_BRACKET_CHARS) | set(SUGARY_FUNCTORS) | {"\\"} | set(_WHITESPACE)


def _load_alias_lines(lines: Iterator[str] | list[str]) -> dict[str, str]:
    table: dict[str, str] = {}
    for raw in lines:
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        spelling, sep, target = line.partition("\t")
        if not sep or not spelling or not target:
            raise ValueError(f"malformed alias line: {line!r}")
        table[spelling] = target
    return table


def _default_aliases() -> dict[str, str]:
    try:
        data = resources.files(__package__).joinpath("aliases.tsv").read_text("utf-8")
    except (FileNotFoundError, TypeError):
        return {"lr": "⿰", "tb": "⿱"}
    return _load_alias_lines(data.splitlines())


_ALIASES: dict[str, str] = _default_aliases()


def alias_table() -> dict[str, str]:
    """A copy of the active functor-spelling alias table."""
    return dict(_ALIASES)


def load_aliases(path: str) -> dict[str, str]:
    """Replace the alias table with the TSV file at ``path``.

    Each line is ``spelling TAB canonical-character``; blank lines and
    ``#`` comments are ignored.  Returns the new table.
    """
    with open(path, encoding="utf-8") as fh:
        table = _load_alias_lines(fh)
    _ALIASES.clear()
    _ALIASES.update(table)
    return dict(_ALIASES)


# ── Diagnostics ──────────────────────────────────────────────────────────

RECOVERABLE = "recoverable"
FATAL = "fatal"


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    """A parse problem: UTF-8 byte offset, message, and severity."""

    offset: int
    message: str
    severity: str


class _ParseAbort(Exception):
    def __init__(self, pos: int, message: str, fatal: bool = False):
        super().__init__(message)
        self.pos = pos
        self.message = message
        self.fatal = fatal


# ── Parser ───────────────────────────────────────────────────────────────


def _scan_string(text: str, i: int, closer: str, what: str) -> tuple[str, int, bool]:
    """Scan a bracketed string body starting just past its opener.

    Returns (content, position past the closer, whether any escape was
    used).  A closing bracket immediately after the opener is literal.
    """
    n = len(text)
    out: list[str] = []
    escaped = False
    first = True
    while True:
        if i >= n:
            raise _ParseAbort(i, f"unterminated {what} at end of input", fatal=True)
        c = text[i]
        if c == "\\":
            if i + 1 >= n:
                raise _ParseAbort(i, "escape at end of input", fatal=True)
            out.append(text[i + 1])
            i += 2
            escaped = True
        elif c == closer and not first:
            return "".join(out), i + 1, escaped
        else:
            out.append(c)
            i += 1
        first = False


def _parse_tree(text: str, pos: int) -> tuple[EidsTree, int]:
    n = len(text)
    head: Symbol | None = None
    if pos < n and text[pos] in _HEAD_OPENERS:
        closer = _HEAD_OPENERS[text[pos]]
        head_text, pos, _ = _scan_string(text, pos + 1, closer, "head")
        head = intern(head_text)
        if pos >= n:
            raise _ParseAbort(pos, "head is not followed by a functor")
    if pos >= n:
        raise _ParseAbort(pos, "expected a tree")

    c = text[pos]
    if c in _FUNCTOR_OPENERS:
        arity = _FUNCTOR_OPENERS[c]
        closer = _FUNCTOR_CLOSERS[c]
        functor_text, pos, escaped = _scan_string(text, pos + 1, closer, "functor")
        if not escaped:
            # Aliases replace whole spellings written without escapes.
            functor_text = _ALIASES.get(functor_text, functor_text)
        functor = intern(functor_text)
    elif c in SUGARY_FUNCTORS:
        arity = SUGARY_FUNCTORS[c]
        functor = intern(c)
        pos += 1
    elif c == "\\":
        if pos + 1 >= n:
            raise _ParseAbort(pos, "escape at end of input", fatal=True)
        if head is not None:
            raise _ParseAbort(pos, "a literal character cannot follow an explicit head")
        return EidsTree(_SEMICOLON, intern(text[pos + 1]), ()), pos + 2
    elif c in _NOT_BARE:
        raise _ParseAbort(pos, f"unexpected {c!r} where a tree was expected")
    else:
        if head is not None:
            raise _ParseAbort(pos, "a literal character cannot follow an explicit head")
        return EidsTree(_SEMICOLON, intern(c), ()), pos + 1

    children: list[EidsTree] = []
    for _ in range(arity):
        while pos < n and text[pos] in _CHILD_SKIP:
            pos += 1
        if pos >= n:
            raise _ParseAbort(pos, "tree is missing a child at end of input")
        if text[pos] in "\r\n":
            raise _ParseAbort(pos, "tree continues past end of line")
        child, pos = _parse_tree(text, pos)
        children.append(child)
    return EidsTree(functor, head, tuple(children)), pos


class StreamParser:
    """Iterate the trees of an EIDS stream with their byte spans.

    Yields ``(tree, start, end)`` where ``start``/``end`` are UTF-8 byte
    offsets delimiting exactly the tree's source text.  Diagnostics
    accumulate on :attr:`diagnostics` as iteration proceeds.
    """

    def __init__(self, text: str):
        self._text = text
        self.diagnostics: list[ParseDiagnostic] = []
        self._char = 0
        self._byte = 0

    def _byte_offset(self, char_pos: int) -> int:
        # Conversion requests arrive in nondecreasing order, so a single
        # forward cursor suffices.
        self._byte += len(self._text[self._char:char_pos].encode("utf-8"))
        self._char = char_pos
        return self._byte

    def __iter__(self) -> Iterator[tuple[EidsTree, int, int]]:
        text = self._text
        n = len(text)
        pos = 0
        while True:
            while pos < n and text[pos] in _WHITESPACE:
                pos += 1
            if pos >= n:
                return
            start = pos
            try:
                parsed, end = _parse_tree(text, pos)
            except _ParseAbort as err:
                severity = FATAL if err.fatal else RECOVERABLE
                self.diagnostics.append(
                    ParseDiagnostic(self._byte_offset(err.pos), err.message, severity)
                )
                if err.fatal:
                    return
                cut = text.find("\n", err.pos)
                if cut < 0:
                    return
                pos = cut + 1
                continue
            yield parsed, self._byte_offset(start), self._byte_offset(end)
            pos = end


def parse_stream(text: str) -> tuple[list[EidsTree], list[ParseDiagnostic]]:
    """Parse every consecutive tree in ``text``.

    Returns the trees and the diagnostics; see the module docstring for
    the recovery rules.  Diagnostic offsets are UTF-8 byte offsets.
    """
    parser = StreamParser(text)
    trees = [parsed for parsed, _, _ in parser]
    return trees, parser.diagnostics


# ── Cooked serializer ────────────────────────────────────────────────────


def _escape(text: str, closer: str, force_first: bool = False) -> str:
    out: list[str] = []
    for i, c in enumerate(text):
        if c == "\\" or (c == closer and i > 0) or (i == 0 and force_first):
            out.append("\\")
        out.append(c)
    return "".join(out)


def write_cooked(node: EidsTree) -> str:
    """Serialize ``node`` to its canonical cooked form.

    The output is deterministic and re-parses to exactly the same tree:
    a leaf ``<c>(;)`` with a single safe character head is written as the
    bare character, other heads as ``【h】``, sugary functors as their
    bare character, and everything else in explicit arity brackets with
    escapes.  Children follow in order.  Writers emitting multiple trees
    put one per line.
    """
    parts: list[str] = []
    _write(node, parts)
    return "".join(parts)


def _write(node: EidsTree, out: list[str]) -> None:
    if node.head is not None:
        head_text = node.head.text
        if (
            node.functor is _SEMICOLON
            and not node.children
            and len(head_text) == 1
            and head_text not in _NOT_BARE
        ):
            out.append(head_text)
            return
        out.append("【")
        out.append(_escape(head_text, "】"))
        out.append("】")
    functor_text = node.functor.text
    arity = len(node.children)
    if len(functor_text) == 1 and SUGARY_FUNCTORS.get(functor_text) == arity:
        out.append(functor_text)
    else:
        opener, closer = _WRITE_BRACKETS[arity]
        out.append(opener)
        # Escaping the first character of an alias spelling stops the
        # parser from rewriting it back to the canonical functor.
        out.append(_escape(functor_text, closer, force_first=functor_text in _ALIASES))
        out.append(closer)
    for child in node.children:
        _write(child, out)
