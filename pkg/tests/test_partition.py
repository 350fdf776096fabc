from __future__ import annotations

import pytest

from cwb import Partition

from oracles import all_partitions


def test_canonical_form_enforced():
    with pytest.raises(ValueError):
        Partition((1, 1))  # block id must be the least element
    with pytest.raises(ValueError):
        Partition((0, 2, 2))  # id must point at a root


def test_constructors_agree():
    p = Partition.from_blocks(4, [[0, 2], [1, 3]])
    assert p == Partition.from_pairs(4, [(0, 2), (3, 1)])
    assert p == Partition.from_keys(["a", "b", "a", "b"])
    assert p.blocks() == ((0, 2), (1, 3))


def test_zero_one():
    assert Partition.zero(3).blocks() == ((0,), (1,), (2,))
    assert Partition.one(3).blocks() == ((0, 1, 2),)
    assert Partition.zero(1) == Partition.one(1)


def test_meet_join_against_all_partitions_n4():
    """Lattice laws checked against definitions over all 15 partitions of 4."""
    parts = [Partition.from_blocks(4, blocks) for blocks in all_partitions(4)]
    for p in parts:
        for q in parts:
            m = p.meet(q)
            j = p.join(q)
            assert m.refines(p) and m.refines(q)
            assert p.refines(j) and q.refines(j)
            # Meet is the greatest lower bound.
            for r in parts:
                if r.refines(p) and r.refines(q):
                    assert r.refines(m)
                if p.refines(r) and q.refines(r):
                    assert j.refines(r)


def test_meet_with_zero_and_one():
    p = Partition.from_blocks(4, [[0, 2], [1, 3]])
    assert p.meet(Partition.zero(4)) == Partition.zero(4)
    assert p.join(Partition.one(4)) == Partition.one(4)
    assert p.meet(Partition.one(4)) == p


def test_compose():
    p = Partition.from_blocks(3, [[0, 1], [2]])
    q = Partition.from_blocks(3, [[0], [1, 2]])
    assert (0, 2) in p.compose(q)
    assert (0, 2) not in q.compose(p)


def test_size_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        Partition.zero(3).meet(Partition.zero(4))


def test_pairs_include_diagonal():
    p = Partition.from_blocks(2, [[0, 1]])
    assert set(p.pairs()) == {(0, 0), (0, 1), (1, 0), (1, 1)}
