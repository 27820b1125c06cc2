"""Compile a query tree into sound prefilters.

A compiled query carries two progressively more precise filters over
signature vectors, used to discard dictionary entries before the tree
matcher runs:

* a lambda filter (cheap: one AND and a popcount per entry), and
* a monotone BDD (dearer per entry, but exact about bit combinations).

Both are *sound*: if the query matches an entry, both filters accept
the entry's vector.  The converse is deliberately not promised; a
filter may pass entries the matcher then rejects.

Negation cannot be filtered directly (the vector of a non-match has no
usable structure), so queries are first normalized: double negations
cancel and De Morgan's laws push ``!`` through ``&`` and ``|`` in both
directions, which often leaves something filterable.  A negation that
survives normalization compiles to the match-everything filter, as do
``.@.``, ``./.``, and ``.#.``.  The bare wildcard ``?`` is
match-everything and ``!?`` match-nothing by recognition.

Head-carrying nodes compile to a disjunction mirroring the match rules:
either the entry's root head equals the node's head, or the entry is
headless and its structure fits.  Children are remapped onto the parent
vector through the slot maps FIRST, DEEP, and LAST, matching how
:func:`hangrep.bitvec.vec` merges child words, and ``...`` becomes the
disjunction of "at the root", "at the first child", "at the last
child", and "anywhere deeper".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from . import bitvec
from .bdd import FALSE, TRUE, BddFunction, BddStore
from .bitvec import MATCH_EVERYTHING, LambdaFilter, lambda_remap, triple_mask
from .eids import EidsTree, intern
from .matching import OPERATOR_NAMES, should_memoize

__all__ = [
    "FIRST",
    "DEEP",
    "LAST",
    "CHILD_SLOTS",
    "slot_varmap",
    "CompiledQuery",
    "normalize_not",
    "compile_query",
]

#: Slot maps: source word of a child vector -> word of the parent vector.
FIRST: Mapping[int, int] = MappingProxyType({1: 2, 2: 4, 3: 4, 4: 4})
LAST: Mapping[int, int] = MappingProxyType({1: 3, 2: 4, 3: 4, 4: 4})
DEEP: Mapping[int, int] = MappingProxyType({1: 4, 2: 4, 3: 4, 4: 4})

#: Per-arity slot maps for each child position.  An only child reuses
#: FIRST: its word 1 appears in parent words 2 and 3 alike, and mapping
#: onto just one image keeps the collision analysis one-to-one.
CHILD_SLOTS: dict[int, tuple[Mapping[int, int], ...]] = {
    1: (FIRST,),
    2: (FIRST, LAST),
    3: (FIRST, DEEP, LAST),
}


def slot_varmap(slots: Mapping[int, int]) -> dict[int, int]:
    """Expand a word-level slot map to a bit-level variable map."""
    out: dict[int, int] = {}
    for source, target in slots.items():
        src_base = (source - 1) * 32
        dst_base = (target - 1) * 32
        for p in range(1, 33):
            out[src_base + p] = dst_base + p
    return out


_VARMAPS = {
    "FIRST": slot_varmap(FIRST),
    "LAST": slot_varmap(LAST),
    "DEEP": slot_varmap(DEEP),
}
_CHILD_VARMAPS: dict[int, tuple[dict[int, int], ...]] = {
    1: (_VARMAPS["FIRST"],),
    2: (_VARMAPS["FIRST"], _VARMAPS["LAST"]),
    3: (_VARMAPS["FIRST"], _VARMAPS["DEEP"], _VARMAPS["LAST"]),
}

_HEAD_DOMAIN = 0x00
_FUNCTOR_DOMAIN = 0x01


@dataclass(frozen=True)
class CompiledQuery:
    """A query tree with its prefilters and memoization advice."""

    needle: EidsTree
    lam: LambdaFilter
    bdd: BddFunction
    memoize: bool


def _is_not(node: EidsTree) -> bool:
    return OPERATOR_NAMES.get((node.functor.text, len(node.children))) == "not"


def _operator(node: EidsTree) -> str | None:
    return OPERATOR_NAMES.get((node.functor.text, len(node.children)))


def normalize_not(node: EidsTree) -> EidsTree:
    """Push negations down until none can be simplified further.

    ``!!X`` collapses to ``X`` and ``!`` distributes over ``&``/``|``
    by De Morgan, in both directions of nesting.  Rewrites only fire
    when the inner node is headless: a head on the negated node would
    change which rule the matcher applies first, so such nodes are left
    alone.  Heads on the outer ``!`` transfer to the rewritten root,
    preserving the head-priority rule.
    """
    if _is_not(node):
        inner = normalize_not(node.children[0])
        if inner.head is None:
            name = _operator(inner)
            if name == "not":
                kept = inner.children[0]
                if node.head is None:
                    return kept
                return EidsTree(kept.functor, node.head, kept.children)
            if name in ("and", "or"):
                flipped = "|" if name == "and" else "&"
                negated = tuple(
                    normalize_not(EidsTree(node.functor, None, (child,)))
                    for child in inner.children
                )
                return EidsTree(intern(flipped), node.head, negated)
        if inner is node.children[0]:
            return node
        return EidsTree(node.functor, node.head, (inner,))
    changed = False
    children = []
    for child in node.children:
        normalized = normalize_not(child)
        changed = changed or normalized is not child
        children.append(normalized)
    if not changed:
        return node
    return EidsTree(node.functor, node.head, tuple(children))


# ── Lambda-side helpers ──────────────────────────────────────────────────


def _lam_or(f1: LambdaFilter, f2: LambdaFilter) -> LambdaFilter:
    if f1.is_nothing():
        return f2
    if f2.is_nothing():
        return f1
    if f1.is_everything() or f2.is_everything():
        return MATCH_EVERYTHING
    return bitvec.lambda_or(f1, f2)


def _lam_and(f1: LambdaFilter, f2: LambdaFilter) -> LambdaFilter:
    if f1.is_everything():
        return f2
    if f2.is_everything():
        return f1
    if f1.is_nothing():
        return f1
    if f2.is_nothing():
        return f2
    return bitvec.lambda_and(f1, f2)


class _Compiler:
    def __init__(self, store: BddStore, cap: int):
        self.store = store
        self.cap = cap

    # Every binary operation and every remap is followed by the
    # complexity cap, so no intermediate result escapes the bound.

    def _band(self, a: int, b: int) -> int:
        return self.store.cap_complexity(self.store.and_(a, b), self.cap)

    def _bor(self, a: int, b: int) -> int:
        return self.store.cap_complexity(self.store.or_(a, b), self.cap)

    def _bremap(self, a: int, varmap: dict[int, int]) -> int:
        return self.store.cap_complexity(self.store.remap(a, varmap), self.cap)

    def _atom(self, domain: int, payload: bytes) -> tuple[LambdaFilter, int]:
        mask = triple_mask(domain, payload)
        lam = LambdaFilter(bitvec.Vec128(mask), 2)
        node = TRUE
        for i in sorted(bitvec.hash_triple(domain, payload), reverse=True):
            node = self.store.and_(self.store.var(i), node)
        return lam, node

    def _atom_head(self, head_text: str) -> tuple[LambdaFilter, int]:
        return self._atom(_HEAD_DOMAIN, head_text.encode("utf-8"))

    def _atom_headless(self) -> tuple[LambdaFilter, int]:
        return self._atom(_HEAD_DOMAIN, b"")

    def _atom_shape(self, functor: str, arity: int) -> tuple[LambdaFilter, int]:
        return self._atom(_FUNCTOR_DOMAIN, bytes([arity]) + functor.encode("utf-8"))

    def query(self, node: EidsTree) -> tuple[LambdaFilter, int]:
        if node.head is not None:
            head_lam, head_bdd = self._atom_head(node.head.text)
            bare_lam, bare_bdd = self._atom_headless()
            core_lam, core_bdd = self._core(node)
            lam = _lam_or(head_lam, _lam_and(bare_lam, core_lam))
            bdd = self._bor(head_bdd, self._band(bare_bdd, core_bdd))
            return lam, bdd
        return self._core(node)

    def _core(self, node: EidsTree) -> tuple[LambdaFilter, int]:
        name = _operator(node)
        if name is None:
            return self._basic(node)
        if name == "any":
            return MATCH_EVERYTHING, TRUE
        if name == "not":
            inner = node.children[0]
            if inner.head is None and _operator(inner) == "any":
                return bitvec.MATCH_NOTHING, FALSE
            return MATCH_EVERYTHING, TRUE
        if name == "and":
            l1, b1 = self.query(node.children[0])
            l2, b2 = self.query(node.children[1])
            return _lam_and(l1, l2), self._band(b1, b2)
        if name == "or":
            l1, b1 = self.query(node.children[0])
            l2, b2 = self.query(node.children[1])
            return _lam_or(l1, l2), self._bor(b1, b2)
        if name == "literal":
            return self._literal(node.children[0])
        if name == "permute":
            return self._permute(node.children[0])
        if name == "anywhere":
            return self._anywhere(node.children[0])
        # assoc, regex, user: no vector structure to exploit.
        return MATCH_EVERYTHING, TRUE

    def _basic(self, node: EidsTree) -> tuple[LambdaFilter, int]:
        arity = len(node.children)
        lam, bdd = self._atom_shape(node.functor.text, arity)
        for i, child in enumerate(node.children):
            child_lam, child_bdd = self.query(child)
            lam = _lam_and(lam, lambda_remap(child_lam, CHILD_SLOTS[arity][i]))
            bdd = self._band(bdd, self._bremap(child_bdd, _CHILD_VARMAPS[arity][i]))
        return lam, bdd

    def _literal(self, pattern: EidsTree) -> tuple[LambdaFilter, int]:
        # Same as query(), but the pattern root's operator meaning is off.
        if pattern.head is not None:
            head_lam, head_bdd = self._atom_head(pattern.head.text)
            bare_lam, bare_bdd = self._atom_headless()
            core_lam, core_bdd = self._basic(pattern)
            lam = _lam_or(head_lam, _lam_and(bare_lam, core_lam))
            bdd = self._bor(head_bdd, self._band(bare_bdd, core_bdd))
            return lam, bdd
        return self._basic(pattern)

    def _permute(self, pattern: EidsTree) -> tuple[LambdaFilter, int]:
        if len(pattern.children) <= 1:
            return self.query(pattern)
        seen: set[tuple[EidsTree, ...]] = set()
        lam = bitvec.MATCH_NOTHING
        bdd = FALSE
        for perm in itertools.permutations(pattern.children):
            if perm in seen:
                continue
            seen.add(perm)
            vl, vb = self.query(EidsTree(pattern.functor, pattern.head, perm))
            lam = _lam_or(lam, vl)
            bdd = self._bor(bdd, vb)
        return lam, bdd

    def _anywhere(self, pattern: EidsTree) -> tuple[LambdaFilter, int]:
        # A subtree sits at the root, at the first child, at the last
        # child, or wholly inside word 4; one remap per case.
        inner_lam, inner_bdd = self.query(pattern)
        lam = inner_lam
        bdd = inner_bdd
        for name in ("FIRST", "LAST", "DEEP"):
            lam = _lam_or(lam, lambda_remap(inner_lam, _SLOTS_BY_NAME[name]))
            bdd = self._bor(bdd, self._bremap(inner_bdd, _VARMAPS[name]))
        return lam, bdd


_SLOTS_BY_NAME = {"FIRST": FIRST, "LAST": LAST, "DEEP": DEEP}


def compile_query(needle: EidsTree, bdd_cap: int = 1000) -> CompiledQuery:
    """Compile ``needle`` into its prefilters.

    The compilation is total: queries with no filterable structure get
    the match-everything filters.  Each call uses a fresh BDD store,
    discarded with the returned query.
    """
    normalized = normalize_not(needle)
    store = BddStore()
    lam, root = _Compiler(store, bdd_cap).query(normalized)
    return CompiledQuery(needle, lam, BddFunction(store, root), should_memoize(needle))
