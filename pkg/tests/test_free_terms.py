from __future__ import annotations

import json

import pytest

from cwb import (
    BudgetError,
    FiniteAlgebra,
    Var,
    absorbing_catalog,
    binary_term_catalog,
    empirical_M,
    eval_term,
    find_maltsev,
    generate_free,
    load_corpus,
    rank_tuple,
    term_vars,
    variety_bounds,
)

from oracles import free_vector_count_oracle


def test_generate_free_counts_match_oracle(z2, z4, z2x2):
    assert len(generate_free(z2, 2)) == free_vector_count_oracle(z2, 2) == 4
    assert len(generate_free(z4, 2)) == free_vector_count_oracle(z4, 2) == 16
    assert len(generate_free(z2x2, 2)) == free_vector_count_oracle(z2x2, 2) == 4


def test_generate_free_z2_elements(z2):
    catalog = generate_free(z2, 2)
    assert catalog.complete
    names = {
        tuple(v): w for v, w in zip(catalog.vectors, catalog.witnesses)
    }
    # Coordinates (x, y) in rank order: (0,0), (0,1), (1,0), (1,1).
    assert names[(0, 0, 1, 1)] == Var(0)  # x
    assert names[(0, 1, 0, 1)] == Var(1)  # y
    assert (0, 0, 0, 0) in names  # e
    assert (0, 1, 1, 0) in names  # x + y


def test_projections_only_signature():
    bare = FiniteAlgebra("bare", 3, (), ())
    catalog = generate_free(bare, 1)
    assert len(catalog) == 1 and catalog.complete
    assert catalog.witnesses == (Var(0),)


def test_size_one_catalog(trivial):
    assert len(binary_term_catalog(trivial)) == 1


def test_witness_faithfulness_checked_on_construction(z4):
    generate_free(z4, 2).verify()  # raises on any mismatch


def test_truncation_flag(z4):
    catalog = generate_free(z4, 2, budget=5)
    assert not catalog.complete
    assert len(catalog) <= 5
    with pytest.raises(BudgetError):
        binary_term_catalog(z4, budget=5)


def test_find_maltsev_on_groups():
    for name in ("Z2", "Z4", "Z2x2", "Z6", "S3", "D4"):
        alg = load_corpus(name)
        result = find_maltsev(alg)
        assert result.witness is not None
        term = result.witness.term
        assert term_vars(term) == frozenset({0, 1, 2})
        # m(x,y,y) = x = m(y,y,x), exhaustively.
        for x in range(alg.size):
            for y in range(alg.size):
                assert eval_term(alg, term, {0: x, 1: y, 2: y}) == x
                assert eval_term(alg, term, {0: y, 1: y, 2: x}) == x


def test_find_maltsev_absent_with_complete_flag(two_bare):
    result = find_maltsev(two_bare)
    assert result.witness is None
    assert result.complete
    assert result.status == "absent"


def test_find_maltsev_unknown_when_truncated(d4):
    result = find_maltsev.__wrapped__(d4, 2)  # bypass cache: budget too small
    assert result.witness is None and not result.complete
    assert result.status == "unknown"


def test_restricted_index_covers_identity_instances(z4):
    """Every Mal'tsev identity instance is a coordinate of the C index set."""
    result = find_maltsev(z4)
    n = z4.size
    index = set()
    for a in range(n):
        for b in range(n):
            index.add(rank_tuple((a, b, b), n))
            index.add(rank_tuple((b, b, a), n))
    # Re-run the restricted generation to inspect its index set.
    catalog = generate_free(z4, 3, index)
    assert set(catalog.index_set) == index
    assert result.witness.checked_instances == (n * n, n * n)


def test_absorbing_arity1(z4):
    catalog = absorbing_catalog(z4, 1)
    assert catalog.complete
    vectors = {v for v, _ in catalog.elements}
    n = z4.size
    x_vec = tuple((r // n) % n for r in range(n * n))
    z_vec = catalog.z_vector
    assert x_vec in vectors and z_vec in vectors
    assert any(v != z_vec for v in vectors)


def test_absorbing_semantic_condition(z4, d4):
    """Filtered elements satisfy the delta condition pointwise."""
    for alg in (z4, d4):
        for nvars in (1, 2):
            catalog = absorbing_catalog(alg, nvars)
            n = alg.size
            for vec, _ in catalog.elements:
                for r in range(n ** (nvars + 1)):
                    digits = []
                    q = r
                    for _ in range(nvars + 1):
                        q, d = divmod(q, n)
                        digits.append(d)
                    digits.reverse()
                    z_val = digits[-1]
                    for i in range(nvars):
                        if digits[i] == z_val:
                            assert vec[r] == z_val
                            break


def test_absorbing_arity2_only_z_for_abelian(z2, z4):
    for alg in (z2, z4):
        for nvars in (2, 3):
            catalog = absorbing_catalog(alg, nvars)
            assert catalog.complete
            assert catalog.nontrivial() == ()


def test_empirical_m_values(z2, z4, d4):
    for alg in (z2, z4):
        res = empirical_M(alg, 3)
        assert res.m_emp == 1
        assert res.complete and res.status == "complete"
    res = empirical_M(d4, 2)
    assert res.m_emp == 2 and res.complete


def test_variety_bounds(z4, d4, s3):
    b = variety_bounds(z4)
    assert (b.nilpotence_class, b.m_emp, b.n_bound) == (1, 1, 3)
    b = variety_bounds(d4, max_arity=2)
    assert (b.nilpotence_class, b.m_emp, b.n_bound) == (2, 2, 6)
    b = variety_bounds(z4, n_override=5)
    assert b.n_bound == 5
    with pytest.raises(ValueError, match="not nilpotent"):
        variety_bounds(s3)


def test_catalog_dump_round_trips(z2):
    doc = binary_term_catalog(z2).to_json()
    parsed = json.loads(json.dumps(doc))
    assert parsed["nvars"] == 2
    assert parsed["complete"] is True
    assert len(parsed["elements"]) == 4
    assert all(set(e) == {"vector", "term"} for e in parsed["elements"])
