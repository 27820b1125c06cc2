"""Negation normalization and prefilter compilation.

The load-bearing property is soundness: whenever a query matches an
entry, both compiled filters accept the entry's vector.  Precision is
checked statistically in the acceptance suite, not here, because the
filters are allowed to pass entries the matcher rejects.
"""

import random

from conftest import parse_one
from hangrep import (
    Vec128,
    compile_query,
    lambda_check,
    match,
    normalize_not,
    vec,
    write_cooked,
)
from hangrep.filters import DEEP, FIRST, LAST, slot_varmap
from treegen import random_tree


def norm(text: str) -> str:
    return write_cooked(normalize_not(parse_one(text)))


# ── normalize_not ────────────────────────────────────────────────────────


def test_double_negation_collapses():
    assert norm("!!...日") == "...日"
    assert norm("!!!...日") == "!...日"
    assert norm("!!!!x") == "x"


def test_de_morgan_both_ways():
    assert norm("!&ab") == "|!a!b"
    assert norm("!|ab") == "&!a!b"
    assert norm("!|!ab") == "&a!b"
    assert norm("!&!a|bc") == "|a&!b!c"


def test_normalization_is_deep():
    assert norm("⿰x!!y") == "⿰xy"
    assert norm("&!!ab") == "&ab"


def test_headed_inner_node_blocks_rewrite():
    t = parse_one("!【x】&ab")
    assert normalize_not(t) is t
    t2 = parse_one("!【x】!y")
    assert normalize_not(t2) is t2


def test_head_on_outer_not_transfers():
    assert norm("【x】!!y") == "x"
    assert norm("【x】!&ab") == "【x】|!a!b"


def test_untouched_trees_come_back_identical(knot):
    assert normalize_not(knot) is knot


def test_normalization_preserves_matching():
    rng = random.Random(97)
    for _ in range(800):
        needle = random_tree(rng, 3, op_prob=0.4)
        haystack = random_tree(rng, 4, head_prob=0.4)
        rewritten = normalize_not(needle)
        assert match(needle, haystack) == match(rewritten, haystack), write_cooked(
            needle
        )


# ── compile_query: degenerate shapes ─────────────────────────────────────


def test_wildcard_compiles_to_everything():
    q = compile_query(parse_one("?"))
    assert q.lam.is_everything()
    assert q.bdd.is_true()


def test_negated_wildcard_compiles_to_nothing():
    q = compile_query(parse_one("!?"))
    assert q.lam.is_nothing()
    assert q.bdd.is_false()


def test_unfilterable_operators_compile_to_everything():
    for text in ("!...a", "@⿱⿱十一寸", "/士", "#士"):
        q = compile_query(parse_one(text))
        assert q.lam.is_everything(), text
        assert q.bdd.is_true(), text


def test_memoization_advice_is_carried():
    assert not compile_query(parse_one("&...a...b")).memoize
    assert compile_query(parse_one("...&...a...b")).memoize


def test_needle_is_preserved():
    needle = parse_one("⿰糸⿱士口")
    assert compile_query(needle).needle is needle


# ── compile_query: directed soundness ────────────────────────────────────


def check_accepts(query_text: str, entry_text: str) -> None:
    q = compile_query(parse_one(query_text))
    entry = parse_one(entry_text)
    assert match(q.needle, entry), (query_text, entry_text)
    v = vec(entry)
    assert lambda_check(q.lam, v), (query_text, entry_text)
    assert q.bdd.evaluate(v), (query_text, entry_text)


def test_head_query_accepts_headed_entry():
    check_accepts("結", "<結>⿰糸⿱士口")
    check_accepts("=結", "<結>⿰糸⿱士口")


def test_basic_query_accepts_exact_entry():
    check_accepts("⿰糸⿱士口", "⿰糸⿱士口")
    check_accepts("⿰糸⿱士口", "<結>⿰糸⿱士口")


def test_wildcard_children_stay_sound():
    check_accepts("⿰?⿱士口", "⿰糸⿱士口")
    check_accepts("⿰糸⿱?口", "⿰糸⿱士口")


def test_anywhere_all_positions():
    check_accepts("...士", "士")
    check_accepts("...士", "⿰士口")
    check_accepts("...士", "⿰口士")
    check_accepts("...士", "⿰糸⿱士口")
    check_accepts("...士", "⿱⿱⿱abc士")


def test_permute_soundness():
    check_accepts("*⿰⿱士口糸", "⿰糸⿱士口")
    check_accepts("*⿲abc", "⿲cab")


def test_conjunction_disjunction_soundness():
    check_accepts("&...士...口", "⿰糸⿱士口")
    check_accepts("|...王...口", "⿰糸⿱士口")


def test_specific_nonmatching_vectors_are_rejected():
    # Not guaranteed in general (filters may be imprecise), but for
    # these concrete hash values there is no collision, which pins that
    # the filters are actually doing something.
    q = compile_query(parse_one("⿰糸⿱士口"))
    for text in ("語", "月", "⿱士口"):
        v = vec(parse_one(text))
        assert not lambda_check(q.lam, v), text
        assert not q.bdd.evaluate(v), text


def test_bdd_is_sharper_than_lambda():
    # A single-character query against another bare character: both are
    # ";"-leaves, so the shape triple overlaps and the threshold filter
    # cannot tell the heads apart, but the BDD keeps the combination
    # structure and rejects.
    q = compile_query(parse_one("語"))
    v = vec(parse_one("月"))
    assert lambda_check(q.lam, v)
    assert not q.bdd.evaluate(v)
    # Same effect on swapped children under a matching shape.
    q2 = compile_query(parse_one("⿰糸⿱士口"))
    v2 = vec(parse_one("⿰口⿱士糸"))
    assert lambda_check(q2.lam, v2)
    assert not q2.bdd.evaluate(v2)


# ── compile_query: randomized soundness sweep ────────────────────────────


def test_compiled_filters_are_sound():
    rng = random.Random(103)
    needles = [random_tree(rng, 3, op_prob=0.3) for _ in range(60)]
    haystacks = [random_tree(rng, 4, head_prob=0.4) for _ in range(400)]
    compiled = [(n, compile_query(n)) for n in needles]
    checked = 0
    for needle, q in compiled:
        for h in haystacks:
            if not match(needle, h):
                continue
            v = vec(h)
            assert lambda_check(q.lam, v), (write_cooked(needle), write_cooked(h))
            assert q.bdd.evaluate(v), (write_cooked(needle), write_cooked(h))
            checked += 1
    assert checked > 500  # the sweep must actually exercise matches


# ── compilation details ──────────────────────────────────────────────────


def test_slot_varmap_expansion():
    varmap = slot_varmap(FIRST)
    assert len(varmap) == 128
    assert varmap[1] == 33
    assert varmap[33] == 97
    assert varmap[97] == 97
    assert slot_varmap(LAST)[1] == 65
    assert slot_varmap(DEEP)[1] == 97


def test_permute_of_single_child_equals_plain_query():
    star = compile_query(parse_one("*...a"))
    plain = compile_query(parse_one("...a"))
    assert star.lam == plain.lam
    rng = random.Random(107)
    for _ in range(500):
        v = Vec128(rng.getrandbits(128))
        assert star.bdd.evaluate(v) == plain.bdd.evaluate(v)


def test_compilation_is_deterministic():
    a = compile_query(parse_one("&...士⿰?⿱士口"))
    b = compile_query(parse_one("&...士⿰?⿱士口"))
    assert a.lam == b.lam
    assert a.bdd.node_count() == b.bdd.node_count()
    rng = random.Random(109)
    for _ in range(500):
        v = Vec128(rng.getrandbits(128))
        assert a.bdd.evaluate(v) == b.bdd.evaluate(v)


def test_bdd_cap_is_respected_and_sound():
    heads = [chr(0x4E00 + i) for i in range(40)]
    text = "|" * (len(heads) - 1) + "".join(heads)
    needle = parse_one(text)
    q = compile_query(needle, bdd_cap=25)
    log = q.bdd.store.cap_log
    assert all(after <= 25 for _, after in log)
    # Capping may only generalize: every head's entry still passes.
    for h in heads:
        entry = parse_one(f"<{h}>⿰AB")
        assert match(needle, entry)
        v = vec(entry)
        assert lambda_check(q.lam, v)
        assert q.bdd.evaluate(v)
