"""A small reduced ordered BDD engine for monotone 128-variable functions.

Variables are the bit positions of a signature vector, 1..128, ordered
by index with bit 1 closest to the root.  Only monotone functions are
ever built here (constants, single variables, AND, OR, existential
quantification, and variable remapping all preserve monotonicity), so
there are no complement edges and negation is simply absent.

The engine follows the classic unique-table construction (Bryant, IEEE
Trans. Computers C-35(8), 1986): a node is (variable, low, high) with
low followed when the variable's bit is 0, nodes are hash-consed so
semantically equal functions share one handle, and operations memoize
on node handles.  Each :class:`BddStore` is an isolated universe; the
intended lifecycle is one store per compiled query, discarded with it,
which keeps tables small and needs no eviction policy.

``cap_complexity`` bounds a function's size by existentially
quantifying variables, sound for filters since quantification only
ever generalizes a monotone acceptance test, starting from bit 128
and walking down until the node count fits.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .bitvec import Vec128

__all__ = ["FALSE", "TRUE", "TERMINAL_LEVEL", "BddStore", "BddFunction", "all_vars"]

FALSE = 0
TRUE = 1

#: Sentinel level for terminals; all real variables are smaller.
TERMINAL_LEVEL = 129


class BddStore:
    """A universe of BDD nodes with hash-consing and operation caches."""

    def __init__(self) -> None:
        # Parallel arrays indexed by node handle; 0 and 1 are terminals.
        self._level = [TERMINAL_LEVEL, TERMINAL_LEVEL]
        self._low = [0, 1]
        self._high = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._exists_cache: dict[tuple[int, int], int] = {}
        #: node counts observed after each cap_complexity call.
        self.cap_log: list[tuple[int, int]] = []

    # ── Construction ────────────────────────────────────────────────

    def const(self, value: bool) -> int:
        return TRUE if value else FALSE

    def var(self, i: int) -> int:
        if not 1 <= i <= 128:
            raise ValueError("variables are bit indices 1..128")
        return self._mk(i, FALSE, TRUE)

    def _mk(self, level: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (level, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self._level)
            self._level.append(level)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = node
        return node

    # ── Core operations ─────────────────────────────────────────────

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        key = (f, g, h)
        cached = self._ite_cache.get(key)
        if cached is not None:
            return cached
        level = min(self._level[f], self._level[g], self._level[h])
        f0, f1 = self._cofactors(f, level)
        g0, g1 = self._cofactors(g, level)
        h0, h1 = self._cofactors(h, level)
        result = self._mk(level, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = result
        return result

    def _cofactors(self, node: int, level: int) -> tuple[int, int]:
        if self._level[node] == level:
            return self._low[node], self._high[node]
        return node, node

    def and_(self, f: int, g: int) -> int:
        return self.ite(f, g, FALSE)

    def or_(self, f: int, g: int) -> int:
        return self.ite(f, TRUE, g)

    def exists(self, f: int, i: int) -> int:
        """Existentially quantify variable ``i`` out of monotone ``f``.

        For a monotone function the disjunction of the two cofactors is
        just the high cofactor, so this reduces to forcing bit ``i`` to
        one.
        """
        if f < 2 or self._level[f] > i:
            return f
        key = (f, i)
        cached = self._exists_cache.get(key)
        if cached is not None:
            return cached
        if self._level[f] == i:
            result = self._high[f]
        else:
            result = self._mk(
                self._level[f],
                self.exists(self._low[f], i),
                self.exists(self._high[f], i),
            )
        self._exists_cache[key] = result
        return result

    def remap(self, f: int, varmap: Mapping[int, int]) -> int:
        """Substitute variable ``j`` by variable ``varmap[j]`` throughout.

        The substitution is simultaneous and may be non-injective; when
        two sources share a target the results are merged through ITE,
        which restores ordering and canonicity.
        """
        cache: dict[int, int] = {}

        def walk(node: int) -> int:
            if node < 2:
                return node
            done = cache.get(node)
            if done is not None:
                return done
            low = walk(self._low[node])
            high = walk(self._high[node])
            source = self._level[node]
            result = self.ite(self.var(varmap.get(source, source)), high, low)
            cache[node] = result
            return result

        return walk(f)

    # ── Inspection ──────────────────────────────────────────────────

    def node_count(self, f: int) -> int:
        """Reachable nodes including terminals: TRUE alone counts 1."""
        seen = {f}
        stack = [f]
        while stack:
            node = stack.pop()
            if node < 2:
                continue
            for branch in (self._low[node], self._high[node]):
                if branch not in seen:
                    seen.add(branch)
                    stack.append(branch)
        return len(seen)

    def evaluate(self, f: int, v: Vec128 | int) -> bool:
        bits = v.bits if isinstance(v, Vec128) else v
        node = f
        while node >= 2:
            if (bits >> (self._level[node] - 1)) & 1:
                node = self._high[node]
            else:
                node = self._low[node]
        return node == TRUE

    def cap_complexity(self, f: int, limit: int = 1000) -> int:
        """Quantify variables out of ``f`` until it has <= limit nodes.

        Variables go in decreasing index order (bit 32 of word 4 first,
        bit 1 of word 1 last); quantifying all of them leaves a
        constant, so termination is assured.  Each call records
        (before, after) node counts on :attr:`cap_log`.
        """
        before = self.node_count(f)
        count = before
        bit = 128
        while count > limit and bit >= 1:
            f = self.exists(f, bit)
            count = self.node_count(f)
            bit -= 1
        self.cap_log.append((before, count))
        return f

    def support(self, f: int) -> set[int]:
        """The variables ``f`` actually depends on."""
        out: set[int] = set()
        seen: set[int] = set()
        stack = [f]
        while stack:
            node = stack.pop()
            if node < 2 or node in seen:
                continue
            seen.add(node)
            out.add(self._level[node])
            stack.append(self._low[node])
            stack.append(self._high[node])
        return out


class BddFunction:
    """A function handle bound to its store.

    Combining functions from different stores is a programming error
    and raises ValueError.
    """

    __slots__ = ("store", "node")

    def __init__(self, store: BddStore, node: int):
        self.store = store
        self.node = node

    def _peer(self, other: "BddFunction") -> int:
        if other.store is not self.store:
            raise ValueError("functions belong to different stores")
        return other.node

    def __and__(self, other: "BddFunction") -> "BddFunction":
        return BddFunction(self.store, self.store.and_(self.node, self._peer(other)))

    def __or__(self, other: "BddFunction") -> "BddFunction":
        return BddFunction(self.store, self.store.or_(self.node, self._peer(other)))

    def exists(self, i: int) -> "BddFunction":
        return BddFunction(self.store, self.store.exists(self.node, i))

    def remap(self, varmap: Mapping[int, int]) -> "BddFunction":
        return BddFunction(self.store, self.store.remap(self.node, varmap))

    def capped(self, limit: int = 1000) -> "BddFunction":
        return BddFunction(self.store, self.store.cap_complexity(self.node, limit))

    def node_count(self) -> int:
        return self.store.node_count(self.node)

    def evaluate(self, v: Vec128 | int) -> bool:
        return self.store.evaluate(self.node, v)

    def support(self) -> set[int]:
        return self.store.support(self.node)

    def is_true(self) -> bool:
        return self.node == TRUE

    def is_false(self) -> bool:
        return self.node == FALSE

    def __repr__(self) -> str:
        return f"BddFunction(node={self.node}, size={self.node_count()})"


def all_vars(store: BddStore, indices: Iterable[int]) -> int:
    """The conjunction of the given variables, built smallest-last."""
    result = TRUE
    for i in sorted(indices, reverse=True):
        result = store.and_(store.var(i), result)
    return result
