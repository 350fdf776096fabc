from __future__ import annotations

import pytest

from cwb import (
    App,
    Var,
    eval_term,
    identity_holds,
    parse_term,
    render_term,
    substitute,
    term_key,
    term_stream,
    term_table,
    term_vars,
)


def test_eval_group_word(z4):
    # x * (y^-1 * z) at (1, 0, 2): 1 - 0 + 2 = 3 mod 4
    t = parse_term("mul(x1, mul(inv(x2), x3))", z4.signature)
    assert eval_term(z4, t, {0: 1, 1: 0, 2: 2}) == 3


def test_eval_variable_identity(z6):
    assert eval_term(z6, Var(0), {0: 5}) == 5


def test_eval_product_algebra_square(z2x2):
    t = parse_term("mul(x1, x1)", z2x2.signature)
    assert eval_term(z2x2, t, {0: 3}) == 0


def test_eval_errors(z4):
    with pytest.raises(ValueError, match="unassigned"):
        eval_term(z4, Var(1), {0: 0})
    with pytest.raises(ValueError, match="out of range"):
        eval_term(z4, Var(0), {0: 7})
    with pytest.raises(ValueError, match="arity mismatch"):
        eval_term(z4, App(0, (Var(0),)), {0: 0})


def test_identity_commutativity(z4, s3):
    xy = parse_term("mul(x1, x2)", z4.signature)
    yx = parse_term("mul(x2, x1)", z4.signature)
    assert identity_holds(z4, xy, yx)
    assert not identity_holds(s3, xy, yx)
    assert identity_holds(s3, xy, xy)


def test_canonical_order_smaller_first():
    x = Var(0)
    deep = App(0, (Var(0), Var(1)))
    assert term_key(x) < term_key(Var(1)) < term_key(deep)
    assert term_key(App(0, (x, x))) < term_key(App(0, (x, Var(1))))
    assert term_key(App(0, (x, Var(1)))) < term_key(App(0, (Var(1), x)))


def test_parse_render_round_trip(z4):
    for text in ("mul(x1, inv(x2))", "e", "mul(e, mul(x1, x1))", "inv(x3)"):
        t = parse_term(text, z4.signature)
        assert parse_term(render_term(t, z4.signature), z4.signature) == t


def test_parse_z_maps_after_largest_x(z4):
    t = parse_term("mul(x2, z)", z4.signature)
    assert term_vars(t) == frozenset({1, 2})


def test_parse_rejects_junk(z4):
    with pytest.raises(ValueError):
        parse_term("mul(x1)", z4.signature)
    with pytest.raises(ValueError):
        parse_term("frob(x1, x2)", z4.signature)
    with pytest.raises(ValueError):
        parse_term("mul(x1, x2))", z4.signature)


def test_substitute_shared_structure(z4):
    xy = App(0, (Var(0), Var(1)))
    out = substitute(xy, {1: App(1, (Var(0),))})
    assert render_term(out, z4.signature) == "mul(x1, inv(x1))"
    assert substitute(xy, {}) is xy


def test_term_table_matches_eval(z4):
    t = parse_term("mul(x1, inv(x2))", z4.signature)
    table = term_table(z4, t, 2)
    for a in range(4):
        for b in range(4):
            assert table[a * 4 + b] == eval_term(z4, t, {0: a, 1: b})


def test_term_stream_canonical_and_complete(z4):
    stream = list(term_stream(z4.signature, 2, max_size=3))
    keys = [term_key(t) for t in stream]
    assert keys == sorted(keys)
    assert Var(0) in stream and Var(1) in stream
    assert App(2) in stream  # nullary e
    assert App(0, (Var(0), Var(1))) in stream
    assert all(t.size <= 3 for t in stream)
