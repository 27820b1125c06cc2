"""Tree matching: does needle N match haystack H?

The rules, in priority order:

1. If N and H both have heads, the match is decided by head identity
   alone; nothing else is consulted.
2. Otherwise, if N's (functor, arity) pair is one of the ten matching
   operators, the operator's rule applies:

   ``(?)``   always matches.
   ``...``   matches iff N's child matches some subtree of H (H itself
             included), searched in pre-order.
   ``.*.``   matches iff some permutation of the children of N's child
             pattern makes it match H (at most 3! = 6 permutations).
   ``.!.``   negation.
   ``[&]``   conjunction of both children against H.
   ``[|]``   disjunction of both children against H.
   ``.=.``   literal: head identity when N's child and H both carry
             heads, else equal functor and arity with children matching
             recursively; the child's own operator meaning is ignored
             at that level.
   ``.@.``   associative: see :func:`match_assoc`.
   ``./.``   regular expression: unanchored search of the child's head
             over H's head when both carry heads, else the child's
             functor as a pattern over H's functor with equal arity and
             matching children.
   ``.#.``   reserved for user-defined predicates; not evaluated here.

3. Otherwise N and H must have identical functors and arity, and each
   child of N must match the corresponding child of H.

Results never depend on evaluation order.  Memoization, when enabled,
only changes running time: nested ``...`` and ``.*.`` queries revisit
the same (needle node, haystack node) pairs exponentially often without
it, and at most ``|N| * |H|`` pairs are evaluated with it.
"""

from __future__ import annotations

import itertools
import re
from typing import Callable

from .eids import EidsTree, Symbol, intern
from .errors import QueryError, UnsupportedOperatorError

__all__ = [
    "OPERATOR_NAMES",
    "MatchContext",
    "match",
    "match_assoc",
    "flatten",
    "should_memoize",
]

#: (functor text, arity) -> operator name, for the ten matching operators.
OPERATOR_NAMES: dict[tuple[str, int], str] = {
    ("?", 0): "any",
    (".", 1): "anywhere",
    ("*", 1): "permute",
    ("!", 1): "not",
    ("&", 2): "and",
    ("|", 2): "or",
    ("=", 1): "literal",
    ("@", 1): "assoc",
    ("/", 1): "regex",
    ("#", 1): "user",
}

_DOT = intern(".")
_STAR = intern("*")


def _default_regex(pattern: str, subject: str) -> bool:
    try:
        return re.search(pattern, subject) is not None
    except re.error as err:
        raise QueryError(f"bad regular expression {pattern!r}: {err}") from err


class MatchContext:
    """Per-query state: memo table, permutation cache, regex hook.

    A context belongs to one needle and may be reused across many
    haystack entries; the memo table is keyed on node identities and is
    reset whenever a new haystack root arrives, since node identities
    from a discarded entry may be recycled by the allocator.
    """

    def __init__(
        self,
        memoize: bool = False,
        regex_matcher: Callable[[str, str], bool] | None = None,
    ):
        self.memoize = memoize
        self.regex_matcher = regex_matcher or _default_regex
        self.evaluations = 0
        self._memo: dict[tuple[int, int], bool] | None = {} if memoize else None
        self._entry: EidsTree | None = None
        # id(pattern) -> (pattern, permuted variants); holding the
        # pattern pins its id so the key can never be recycled.
        self._permutations: dict[int, tuple[EidsTree, tuple[EidsTree, ...]]] = {}

    def _begin_entry(self, haystack: EidsTree) -> None:
        if self._memo is not None and self._entry is not haystack:
            self._memo.clear()
            self._entry = haystack

    def _permuted(self, pattern: EidsTree) -> tuple[EidsTree, ...]:
        cached = self._permutations.get(id(pattern))
        if cached is not None and cached[0] is pattern:
            return cached[1]
        if len(pattern.children) <= 1:
            variants: tuple[EidsTree, ...] = (pattern,)
        else:
            seen: set[tuple[EidsTree, ...]] = set()
            out: list[EidsTree] = []
            for perm in itertools.permutations(pattern.children):
                if perm in seen:
                    continue
                seen.add(perm)
                out.append(EidsTree(pattern.functor, pattern.head, perm))
            variants = tuple(out)
        self._permutations[id(pattern)] = (pattern, variants)
        return variants


def match(needle: EidsTree, haystack: EidsTree, ctx: MatchContext | None = None) -> bool:
    """Apply the matching rules above; see the module docstring."""
    if ctx is None:
        ctx = MatchContext(memoize=should_memoize(needle))
    ctx._begin_entry(haystack)
    return _match(needle, haystack, ctx)


def _match(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    memo = ctx._memo
    if memo is not None:
        key = (id(n), id(h))
        hit = memo.get(key)
        if hit is not None:
            return hit
    ctx.evaluations += 1
    result = _decide(n, h, ctx)
    if memo is not None:
        memo[key] = result
    return result


def _decide(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    if n.head is not None and h.head is not None:
        return n.head is h.head
    op = OPERATOR_NAMES.get((n.functor.text, len(n.children)))
    if op is not None:
        return _OPERATORS[op](n, h, ctx)
    if n.functor is not h.functor or len(n.children) != len(h.children):
        return False
    return all(_match(nc, hc, ctx) for nc, hc in zip(n.children, h.children))


def _op_any(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    return True


def _op_anywhere(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    pattern = n.children[0]
    for subtree in h.walk():
        if _match(pattern, subtree, ctx):
            return True
    return False


def _op_permute(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    for variant in ctx._permuted(n.children[0]):
        if _match(variant, h, ctx):
            return True
    return False


def _op_not(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    return not _match(n.children[0], h, ctx)


def _op_and(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    return _match(n.children[0], h, ctx) and _match(n.children[1], h, ctx)


def _op_or(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    return _match(n.children[0], h, ctx) or _match(n.children[1], h, ctx)


def _op_literal(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    pattern = n.children[0]
    if pattern.head is not None and h.head is not None:
        return pattern.head is h.head
    if pattern.functor is not h.functor or len(pattern.children) != len(h.children):
        return False
    return all(_match(pc, hc, ctx) for pc, hc in zip(pattern.children, h.children))


def _op_assoc(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    return match_assoc(n.children[0], h, ctx)


def _op_regex(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    pattern = n.children[0]
    if pattern.head is not None and h.head is not None:
        return ctx.regex_matcher(pattern.head.text, h.head.text)
    if len(pattern.children) != len(h.children):
        return False
    if not ctx.regex_matcher(pattern.functor.text, h.functor.text):
        return False
    return all(_match(pc, hc, ctx) for pc, hc in zip(pattern.children, h.children))


def _op_user(n: EidsTree, h: EidsTree, ctx: MatchContext) -> bool:
    raise UnsupportedOperatorError(
        "the user-predicate operator .#. is not supported by this engine"
    )


_OPERATORS = {
    "any": _op_any,
    "anywhere": _op_anywhere,
    "permute": _op_permute,
    "not": _op_not,
    "and": _op_and,
    "or": _op_or,
    "literal": _op_literal,
    "assoc": _op_assoc,
    "regex": _op_regex,
    "user": _op_user,
}


def flatten(node: EidsTree, functor: Symbol, arity: int) -> list[EidsTree]:
    """Flatten ``node`` by its root shape.

    Descend through every node whose functor and arity equal
    (``functor``, ``arity``), ignoring heads on descended-through
    nodes, and return the maximal subtrees that stop the descent, in
    left-to-right order.  A node that does not have the shape at its
    root flattens to ``[node]``.
    """
    if node.functor is functor and len(node.children) == arity:
        out: list[EidsTree] = []
        for child in node.children:
            out.extend(flatten(child, functor, arity))
        return out
    return [node]


def match_assoc(pattern: EidsTree, haystack: EidsTree, ctx: MatchContext | None = None) -> bool:
    """Match ``pattern`` against ``haystack`` modulo associativity.

    Both trees are flattened by the shape of ``pattern``'s root into
    notional unlimited-arity child lists; the lists must have equal
    length and corresponding elements must match under the full rules.
    Nesting of the root shape is thereby disregarded on both sides.
    """
    if ctx is None:
        ctx = MatchContext(memoize=should_memoize(pattern))
    ctx._begin_entry(haystack)
    functor = pattern.functor
    arity = len(pattern.children)
    wanted = flatten(pattern, functor, arity)
    found = flatten(haystack, functor, arity)
    if len(wanted) != len(found):
        return False
    return all(_match(p, h, ctx) for p, h in zip(wanted, found))


def should_memoize(needle: EidsTree) -> bool:
    """True when ``needle`` warrants memoized matching.

    The trigger is more than two ``...`` or ``.*.`` nodes: below that
    the exponential blow-up cannot bite, and the memo table costs more
    than it saves.
    """
    count = 0
    for node in needle.walk():
        if len(node.children) == 1 and (node.functor is _DOT or node.functor is _STAR):
            count += 1
            if count > 2:
                return True
    return False
