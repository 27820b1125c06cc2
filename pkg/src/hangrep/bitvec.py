"""128-bit signature vectors and lambda filters.

Every tree gets a four-word signature vector.  Word 1 summarizes the
root: three hashed bits for the head (an absent head hashes the empty
string) or'd with three hashed bits for the (arity, functor) pair.
Words 2 and 3 hold the word-1 summaries of the first and last child,
and word 4 accumulates everything deeper.  The exact merge rules are in
:func:`vec`.

A lambda filter (mask, lam) accepts a vector v when
``popcount(mask & v) > lam``, so (anything, -1) accepts everything and
(mask, popcount(mask)) accepts nothing.  The calculus below combines
filters so that soundness is preserved: whatever the corresponding
query matches, the combined filter accepts.  Precision is best effort.

Bit addressing is 1-based and little-endian: bit 1 of word 1 is the
least significant bit of the vector, bit 32 of word 4 the most
significant.  Serialized vectors are sixteen bytes, words in order,
each little-endian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .eids import EidsTree

__all__ = [
    "FNV_OFFSET",
    "FNV_PRIME",
    "fnv1a64",
    "hash_triple",
    "triple_mask",
    "Vec128",
    "vec",
    "LambdaFilter",
    "MATCH_EVERYTHING",
    "MATCH_NOTHING",
    "lambda_check",
    "lambda_or",
    "lambda_and",
    "lambda_remap",
]

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1
_MASK128 = (1 << 128) - 1
_WORD = (1 << 32) - 1

#: Number of 3-element subsets of a 32-bit word: C(32, 3).
_SUBSETS = 4960


def fnv1a64(data: bytes) -> int:
    """The 64-bit FNV-1a hash of ``data``."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 16)
def hash_triple(domain: int, payload: bytes) -> tuple[int, int, int]:
    """Hash ``payload`` within ``domain`` to three distinct bits of a word.

    The domain byte is prepended to the payload, the result is hashed
    with FNV-1a, reduced mod C(32, 3), and unranked lexicographically to
    the r-th 3-element subset of {1..32}.  Deterministic everywhere: no
    per-process or per-platform state is involved.
    """
    r = fnv1a64(bytes([domain]) + payload) % _SUBSETS
    a = 1
    while True:
        below = math.comb(32 - a, 2)
        if r < below:
            break
        r -= below
        a += 1
    b = a + 1
    while True:
        below = 32 - b
        if r < below:
            break
        r -= below
        b += 1
    return a, b, b + 1 + r


def triple_mask(domain: int, payload: bytes, word: int = 1) -> int:
    """The hash triple as a 128-bit mask positioned in ``word`` (1..4)."""
    base = (word - 1) * 32
    bits = 0
    for t in hash_triple(domain, payload):
        bits |= 1 << (base + t - 1)
    return bits


_HEAD_DOMAIN = 0x00
_FUNCTOR_DOMAIN = 0x01


@dataclass(frozen=True, slots=True)
class Vec128:
    """A 128-bit signature vector, stored as one int."""

    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits <= _MASK128:
            raise ValueError("vector out of range")

    @classmethod
    def from_words(cls, w1: int, w2: int, w3: int, w4: int) -> "Vec128":
        return cls(w1 | (w2 << 32) | (w3 << 64) | (w4 << 96))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Vec128":
        if len(data) != 16:
            raise ValueError("a serialized vector is exactly 16 bytes")
        return cls(int.from_bytes(data, "little"))

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes(16, "little")

    def word(self, i: int) -> int:
        return (self.bits >> ((i - 1) * 32)) & _WORD

    @property
    def w1(self) -> int:
        return self.bits & _WORD

    @property
    def w2(self) -> int:
        return (self.bits >> 32) & _WORD

    @property
    def w3(self) -> int:
        return (self.bits >> 64) & _WORD

    @property
    def w4(self) -> int:
        return (self.bits >> 96) & _WORD

    def popcount(self) -> int:
        return self.bits.bit_count()

    def bit(self, i: int) -> bool:
        """Bit ``i`` in global 1-based little-endian addressing."""
        return (self.bits >> (i - 1)) & 1 == 1

    def __or__(self, other: "Vec128") -> "Vec128":
        return Vec128(self.bits | other.bits)

    def __and__(self, other: "Vec128") -> "Vec128":
        return Vec128(self.bits & other.bits)

    def __repr__(self) -> str:
        return f"Vec128({self.bits:#034x})"


def _root_word(node: EidsTree) -> int:
    head_payload = node.head.text.encode("utf-8") if node.head is not None else b""
    word = triple_mask(_HEAD_DOMAIN, head_payload)
    functor_payload = bytes([len(node.children)]) + node.functor.text.encode("utf-8")
    return word | triple_mask(_FUNCTOR_DOMAIN, functor_payload)


def vec(node: EidsTree) -> Vec128:
    """The signature vector of ``node``.

    With w = this node's root word and x, y the child vectors in order:

    * arity 0: (w, 0, 0, 0)
    * arity 1: (w, x1, x1, x2|x3|x4)
    * arity 2: (w, x1, y1, x2|x3|x4|y2|y3|y4)
    * arity 3: (w, x1, z1, everything else of all three children)

    where z is the last child.  Word 1 always has between three and six
    bits set; a leaf's upper words are zero.
    """
    w1 = _root_word(node)
    children = node.children
    if not children:
        return Vec128(w1)
    first = vec(children[0])
    if len(children) == 1:
        v2 = v3 = first.w1
        v4 = first.w2 | first.w3 | first.w4
        return Vec128.from_words(w1, v2, v3, v4)
    last = vec(children[-1])
    v4 = first.w2 | first.w3 | first.w4 | last.w2 | last.w3 | last.w4
    if len(children) == 3:
        middle = vec(children[1])
        v4 |= middle.w1 | middle.w2 | middle.w3 | middle.w4
    return Vec128.from_words(w1, first.w1, last.w1, v4)


# ── Lambda filters ───────────────────────────────────────────────────────


@dataclass(frozen=True, slots=True)
class LambdaFilter:
    """Accepts v iff more than ``lam`` bits of ``mask & v`` are set."""

    mask: Vec128
    lam: int

    def is_everything(self) -> bool:
        return self.lam < 0

    def is_nothing(self) -> bool:
        return self.lam >= self.mask.popcount()


MATCH_EVERYTHING = LambdaFilter(Vec128(0), -1)
MATCH_NOTHING = LambdaFilter(Vec128(0), 0)


def lambda_check(f: LambdaFilter, v: Vec128) -> bool:
    return (f.mask.bits & v.bits).bit_count() > f.lam


def lambda_or(f1: LambdaFilter, f2: LambdaFilter) -> LambdaFilter:
    """A sound filter for the disjunction of two filtered queries.

    Any v accepted by either input is accepted by the result, since the
    union mask can only gain bits and the threshold is the smaller one.
    """
    return LambdaFilter(f1.mask | f2.mask, min(f1.lam, f2.lam))


def lambda_and(f1: LambdaFilter, f2: LambdaFilter) -> LambdaFilter:
    """A sound filter for the conjunction of two filtered queries.

    Split the mask bits into A (only f1), B (only f2), C (shared).  Any
    v passing both filters has more than lam1 bits in A|C and more than
    lam2 in B|C, which forces the per-category minimum counts L below.
    One category subset is then chosen and its guaranteed count becomes
    the new threshold.  Preferring categories whose guarantee exceeds a
    third of their size keeps the filter selective; the fallbacks keep
    it sound when no category is individually strong.
    """
    a_bits = f1.mask.bits & ~f2.mask.bits
    b_bits = f2.mask.bits & ~f1.mask.bits
    c_bits = f1.mask.bits & f2.mask.bits
    alpha = a_bits.bit_count()
    beta = b_bits.bit_count()
    gamma = c_bits.bit_count()
    l1, l2 = f1.lam, f2.lam

    la = max(0, l1 + 1 - gamma)
    lb = max(0, l2 + 1 - gamma)
    lc = max(0, l1 + 1 - alpha, l2 + 1 - beta)
    bounds = {
        "A": (la, a_bits),
        "B": (lb, b_bits),
        "C": (lc, c_bits),
        "AB": (max(la + lb, l1 + l2 + 2 - 2 * gamma), a_bits | b_bits),
        "AC": (max(l1 + 1, la + lc), a_bits | c_bits),
        "BC": (max(l2 + 1, lb + lc), b_bits | c_bits),
        "ABC": (
            max(l1 + 1 + lb, l2 + 1 + la, l1 + l2 + 2 - gamma),
            a_bits | b_bits | c_bits,
        ),
    }

    singles = {"A": (la, alpha), "B": (lb, beta), "C": (lc, gamma)}
    chosen = [name for name, (bound, size) in singles.items() if 3 * bound > size]
    if not chosen:
        chosen = [name for name, (bound, _) in singles.items() if bound >= 1]
    if chosen:
        key = "".join(chosen)
        bound, mask_bits = bounds[key]
    else:
        key = max(bounds, key=lambda k: bounds[k][0])
        bound, mask_bits = bounds[key]
    if bound > mask_bits.bit_count():
        # No vector can satisfy both inputs: their conjunction is empty.
        return LambdaFilter(Vec128(mask_bits), mask_bits.bit_count())
    return LambdaFilter(Vec128(mask_bits), bound - 1)


def lambda_remap(f: LambdaFilter, slots: Mapping[int, int | None]) -> LambdaFilter:
    """Transform a filter on a child vector into one on the parent vector.

    ``slots`` maps each source word (1..4) to the parent word that
    receives it, or None for words the merge drops.  When several source
    words land on the same target word their equal bit positions
    collide: a target bit with collision count k can absorb up to k set
    source bits.  The new threshold is therefore r - 1, where r is the
    smallest number of target bits whose largest collision counts sum to
    at least lam + 1: the fewest distinct target bits that more than
    lam source bits can collapse into.
    """
    counts: dict[int, int] = {}
    for word in (1, 2, 3, 4):
        source = (f.mask.bits >> ((word - 1) * 32)) & _WORD
        if not source:
            continue
        target = slots.get(word)
        if target is None:
            raise ValueError(f"mask has bits in dropped source word {word}")
        base = (target - 1) * 32
        position = source
        while position:
            low = position & -position
            bit = base + low.bit_length() - 1
            counts[bit] = counts.get(bit, 0) + 1
            position ^= low
    mask_bits = 0
    for bit in counts:
        mask_bits |= 1 << bit
    if f.lam < 0:
        return LambdaFilter(Vec128(mask_bits), -1)
    needed = f.lam + 1
    total = 0
    for r, k in enumerate(sorted(counts.values(), reverse=True), start=1):
        total += k
        if total >= needed:
            return LambdaFilter(Vec128(mask_bits), r - 1)
    # The source mask cannot hold lam + 1 bits; nothing can pass.
    return LambdaFilter(Vec128(mask_bits), len(counts))
