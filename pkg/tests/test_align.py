from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from notescore.align import Op, Token, align, tokenize, tokens
from notescore.synth import oracle_edit_distance

WORDS = st.sampled_from(["a", "b", "c", "A", "b.", "x"])
SEQ = st.lists(WORDS, max_size=8).map(lambda ws: [Token(w) for w in ws])


def _ops(al):
    return [o.op for o in al.ops]


def test_tokenize_strips_edge_punctuation():
    toks = tokenize("stop the Clonidine.")
    assert [t.surface for t in toks] == ["stop", "the", "Clonidine"]
    assert [t.normalized for t in toks] == ["stop", "the", "clonidine"]


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   \n\t ") == []


def test_tokenize_keeps_inner_hyphens_and_apostrophes():
    toks = tokenize("well-controlled T2DM,")
    assert [t.surface for t in toks] == ["well-controlled", "T2DM"]
    assert [t.normalized for t in toks] == ["well-controlled", "t2dm"]
    assert [t.surface for t in tokenize("(we're) -- fine!")] == ["we're", "fine"]


def test_token_rejects_empty_surface():
    with pytest.raises(ValueError):
        Token("")


def test_identity_alignment():
    al = align(tokens("x y z".split()), tokens("x y z".split()))
    assert _ops(al) == [Op.KEEP] * 3
    assert al.cost == 0


def test_pure_insertion():
    al = align([], tokens("x y".split()))
    assert _ops(al) == [Op.INSERT, Op.INSERT]
    assert al.cost == 2


def test_single_substitution():
    al = align(tokens("a b c".split()), tokens("a x c".split()))
    assert _ops(al) == [Op.KEEP, Op.SUBSTITUTE, Op.KEEP]
    assert al.cost == 1


def test_shift_example_matches_oracle():
    a, b = tokens("a b c d".split()), tokens("b c d e".split())
    # oracle_edit_distance gives cost 2 with keep 3, delete 1, insert 1
    oracle = oracle_edit_distance(a, b)
    assert oracle.cost == 2
    assert oracle.ops == {"keep": 3, "substitute": 0, "delete": 1, "insert": 1}
    al = align(a, b)
    assert al.cost == 2
    assert _ops(al) == [Op.DELETE, Op.KEEP, Op.KEEP, Op.KEEP, Op.INSERT]
    assert al.ops[0].a_index == 0 and al.ops[-1].b_index == 3


def test_case_and_punctuation_do_not_count():
    al = align(tokenize("Stop the Clonidine."), tokenize("stop the clonidine"))
    assert al.cost == 0


def test_tie_break_prefers_substitute_over_indels():
    # [p] -> [q]: substitute (1) beats delete+insert (2); [p q] -> [q r] ties
    # between sub+sub and del+keep+ins at cost 2
    al = align(tokens(["p", "q"]), tokens(["q", "r"]))
    assert al.cost == 2
    assert _ops(al) == [Op.SUBSTITUTE, Op.SUBSTITUTE]


def _check_invariants(a, b, al):
    ai = [o.a_index for o in al.ops if o.a_index is not None]
    bi = [o.b_index for o in al.ops if o.b_index is not None]
    assert ai == list(range(len(a)))
    assert bi == list(range(len(b)))
    c = al.counts()
    assert c[Op.KEEP] + c[Op.SUBSTITUTE] + c[Op.DELETE] == len(a)
    assert c[Op.KEEP] + c[Op.SUBSTITUTE] + c[Op.INSERT] == len(b)
    assert al.cost == c[Op.SUBSTITUTE] + c[Op.DELETE] + c[Op.INSERT]
    for o in al.ops:
        if o.op == Op.KEEP:
            assert a[o.a_index].normalized == b[o.b_index].normalized
        elif o.op == Op.SUBSTITUTE:
            assert a[o.a_index].normalized != b[o.b_index].normalized
            assert o.b_index is not None
        elif o.op == Op.DELETE:
            assert o.b_index is None
        else:
            assert o.a_index is None


@given(SEQ, SEQ)
def test_cost_matches_oracle(a, b):
    al = align(a, b)
    assert al.cost == oracle_edit_distance(a, b).cost
    _check_invariants(a, b, al)


@given(SEQ, SEQ)
def test_swap_symmetry(a, b):
    ab, ba = align(a, b), align(b, a)
    assert ab.cost == ba.cost
    # ins/del counts swap: |A| - |B| = del - ins on both sides
    assert ab.counts()[Op.DELETE] - ab.counts()[Op.INSERT] == ba.counts()[Op.INSERT] - ba.counts()[Op.DELETE]


@given(SEQ, SEQ)
def test_zero_cost_iff_equal(a, b):
    same = [t.normalized for t in a] == [t.normalized for t in b]
    assert (align(a, b).cost == 0) == same


@given(SEQ, SEQ)
def test_deterministic(a, b):
    assert align(a, b) == align(a, b)


@given(SEQ, SEQ)
def test_backends_agree(a, b):
    assert align(a, b, backend="numba") == align(a, b, backend="numpy")


def test_distinct_tokens_swap_counts_exactly():
    a, b = tokens("a b c d".split()), tokens("b c d e".split())
    ab, ba = align(a, b).counts(), align(b, a).counts()
    assert ab[Op.DELETE] == ba[Op.INSERT] and ab[Op.INSERT] == ba[Op.DELETE]
    assert Counter({Op.KEEP: 3, Op.DELETE: 1, Op.INSERT: 1}) == ab
