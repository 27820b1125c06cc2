"""Look inside the two prefilter layers for one query.

Every tree gets a 128-bit signature: four 32-bit words covering the
root, its first child, its last child, and everything deeper.  A query
compiles to a (mask, threshold) popcount filter plus a monotone BDD
over the same 128 bits; both are sound (a matching entry always
passes), so a scan only parses entries the filters let through.
"""

from hangrep import compile_query, lambda_check, match, MatchContext, parse_stream, vec


def words(v):
    return [f"{(v.bits >> (32 * i)) & 0xFFFFFFFF:08x}" for i in range(4)]


(entry,), _ = parse_stream("<結>⿰糸<吉>⿱士口")
v = vec(entry)
print("entry  ", "【結】⿰糸【吉】⿱士口")
print("vector ", " ".join(words(v)), f" popcount {bin(v.bits).count('1')}")
print()

(needle,), _ = parse_stream("⿰糸⿱士口")
compiled = compile_query(needle)
print("query   ⿰糸⿱士口")
print("lambda  mask popcount", bin(compiled.lam.mask.bits).count("1"),
      "threshold", compiled.lam.lam)
print("bdd     ", compiled.bdd.node_count(), "nodes,",
      len(compiled.bdd.support()), "variables tested")
print("passes lambda:", lambda_check(compiled.lam, v))
print("passes bdd:   ", compiled.bdd.evaluate(v))
print("matches:      ", match(compiled.needle, entry, MatchContext()))
print()

# The layers are deliberately unequal.  The popcount filter only counts
# bits; it cannot see which branch they came from, so a swapped entry
# can slip through it.  The BDD keeps the branch structure and rejects.
(swapped,), _ = parse_stream("⿰口⿱士糸")
sv = vec(swapped)
print("swapped entry ⿰口⿱士糸")
print("passes lambda:", lambda_check(compiled.lam, sv))
print("passes bdd:   ", compiled.bdd.evaluate(sv))
print("matches:      ", match(compiled.needle, swapped, MatchContext()))
