"""Off-corpus algebras: a bigger cyclic group, the quaternion group, and an
affine algebra whose only basic operation is ternary.

The affine algebra exercises every arity-3 code path (term-condition
closures, free generation, witness search) that the bundled group corpus
never touches, and checks the whole dpsc pipeline on a non-group signature.
"""

from __future__ import annotations

import pytest

from cwb import (
    FiniteAlgebra,
    center,
    default_psi_config,
    direct_factorization,
    empirical_M,
    enumerate_si,
    find_maltsev,
    is_isomorphic,
    nilpotence_class,
    si_check,
    theta_semantic_check,
    build_phi,
    ucs_descent,
    verify_dpsc,
)


@pytest.fixture(scope="module")
def z8():
    n = 8
    return FiniteAlgebra(
        "Z8",
        n,
        (("mul", 2), ("inv", 1), ("e", 0)),
        (
            tuple((a + b) % n for a in range(n) for b in range(n)),
            tuple((-a) % n for a in range(n)),
            (0,),
        ),
    )


@pytest.fixture(scope="module")
def q8():
    """Quaternion group: 0..7 = 1, -1, i, -i, j, -j, k, -k."""
    labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]

    def mul_sym(a: str, b: str) -> str:
        sign = ""
        for x in (a, b):
            if x.startswith("-"):
                sign += "-"
        ua, ub = a.lstrip("-"), b.lstrip("-")
        table = {
            ("1", "1"): "1",
            ("1", "i"): "i", ("1", "j"): "j", ("1", "k"): "k",
            ("i", "1"): "i", ("j", "1"): "j", ("k", "1"): "k",
            ("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
            ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
            ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j",
        }
        out = table[(ua, ub)]
        if sign.count("-") % 2:
            out = out[1:] if out.startswith("-") else "-" + out
        return out

    index = {s: i for i, s in enumerate(labels)}
    mul = tuple(
        index[mul_sym(labels[a], labels[b])] for a in range(8) for b in range(8)
    )
    inv = []
    for a in range(8):
        inv.append(next(b for b in range(8) if mul[a * 8 + b] == 0))
    return FiniteAlgebra(
        "Q8", 8, (("mul", 2), ("inv", 1), ("e", 0)), (mul, tuple(inv), (0,))
    )


@pytest.fixture(scope="module")
def affine4():
    """Universe Z4 with the single ternary operation m(x,y,z) = x - y + z."""
    n = 4
    table = tuple(
        (x - y + z) % n for x in range(n) for y in range(n) for z in range(n)
    )
    return FiniteAlgebra("Affine4", n, (("m", 3),), (table,))


def test_z8_invariants(z8):
    assert center(z8).is_one()
    assert nilpotence_class(z8) == 1
    f = direct_factorization(z8)
    assert f.sizes == (8,) and f.all_prime_power
    assert si_check(z8) is not None
    assert si_check(z8).monolith.blocks() == ((0, 4), (1, 5), (2, 6), (3, 7))


def test_z8_dpsc(z8):
    cfg = default_psi_config(z8, max_arity=2)
    entries = enumerate_si(z8, max_power=1, max_size=8)
    assert [e.algebra.size for e in entries] == [2, 4, 8]
    report = verify_dpsc(z8, entries, cfg)
    assert report.passed
    assert report.max_witness_complexity <= cfg.n_bound == 3


def test_q8_invariants(q8):
    # Center is {1, -1}; Q8 is SI of class 2 with that monolith.
    assert center(q8).blocks() == ((0, 1), (2, 3), (4, 5), (6, 7))
    assert nilpotence_class(q8) == 2
    witness = si_check(q8)
    assert witness is not None
    assert witness.monolith == center(q8)
    f = direct_factorization(q8)
    assert f.sizes == (8,) and f.all_prime_power


def test_q8_descent(q8):
    cfg = default_psi_config(q8, max_arity=2)
    assert cfg.bounds.m_emp == 2
    chain = ucs_descent(q8, 2, 0, cfg)  # (i, 1) is not central
    assert any(step.stage >= 1 for step in chain.steps)
    assert chain.critical_pair[1] == 0
    assert si_check(q8).monolith.related(*chain.critical_pair)


def test_q8_dpsc_and_theta(q8):
    """Full class-2 pipeline: catalog {Z2, Z4, Q8}, dpsc and Theta pass."""
    cfg = default_psi_config(q8, max_arity=2)
    assert cfg.n_bound == 6
    entries = enumerate_si(q8, max_power=1, max_size=8)
    assert [e.algebra.size for e in entries] == [2, 4, 8]
    report = verify_dpsc(q8, entries, cfg)
    assert report.passed
    assert report.max_witness_complexity <= cfg.n_bound
    phi = build_phi(q8)
    assert len(phi) == 32
    assert theta_semantic_check(q8, phi, cfg) is True


def test_d4_dpsc_and_theta():
    from cwb import load_corpus

    d4 = load_corpus("D4")
    cfg = default_psi_config(d4, max_arity=2)
    entries = enumerate_si(d4, max_power=1, max_size=8)
    assert [e.algebra.size for e in entries] == [2, 4, 8]
    report = verify_dpsc(d4, entries, cfg)
    assert report.passed
    assert report.max_witness_complexity <= cfg.n_bound == 6
    phi = build_phi(d4)
    assert theta_semantic_check(d4, phi, cfg) is True


def test_affine4_center_and_class(affine4):
    assert center(affine4).is_one()
    assert nilpotence_class(affine4) == 1


def test_affine4_maltsev_is_basic_op(affine4):
    result = find_maltsev(affine4)
    assert result.witness is not None
    assert result.witness.term.size == 4  # m(x1, x2, x3) itself


def test_affine4_bounds_and_phi(affine4):
    assert empirical_M(affine4, 2).m_emp == 1
    phi = build_phi(affine4)
    # m preserves coefficient sums, so binary terms are ax + (1-a)y: 4 maps.
    assert len(phi) == 4


def test_affine4_hypotheses(affine4):
    f = direct_factorization(affine4)
    assert f.all_prime_power
    assert find_maltsev(affine4).witness is not None
    assert nilpotence_class(affine4) == 1


def test_affine4_dpsc_and_theta(affine4):
    cfg = default_psi_config(affine4, max_arity=2)
    entries = enumerate_si(affine4, max_power=1, max_size=8)
    assert entries, "V(Affine4) should have small SI members"
    report = verify_dpsc(affine4, entries, cfg)
    assert report.passed
    phi = build_phi(affine4)
    for entry in entries:
        assert theta_semantic_check(entry.algebra, phi, cfg) is True
    assert theta_semantic_check(affine4, phi, cfg) is (si_check(affine4) is not None)


def test_affine4_subalgebras_are_cosets(affine4):
    """Closure under x - y + z of two points is the affine line through them."""
    from cwb import subuniverse_closure

    assert subuniverse_closure(affine4, {0}) == frozenset({0})
    assert subuniverse_closure(affine4, {0, 2}) == frozenset({0, 2})
    assert subuniverse_closure(affine4, {1, 3}) == frozenset({1, 3})
    assert subuniverse_closure(affine4, {0, 1}) == frozenset({0, 1, 2, 3})
