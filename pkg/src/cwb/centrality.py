"""Term-condition engine: center, Abelian congruences, upper central series.

The center test for a pair (a, b) generates the subalgebra of A^4 from
{(x, y, x, y) : x, y in A} plus (a, a, b, b) and checks 1st = 2nd <-> 3rd = 4th
on every quadruple: the closure's quadruples are exactly
(t(u, a), t(v, a), t(u, b), t(v, b)) over all terms t and parameter tuples.
Quadruples are rank-encoded and closed with vectorized table lookups; the test
short-circuits on the first violating quadruple.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Iterable

import numpy as np

from .algebra import FiniteAlgebra, quotient
from .errors import DEFAULT_BUDGET, BudgetError, VerificationError
from .partition import Partition


class TermConditionKind(Enum):
    CENTRALITY = "centrality"  # 1st = 2nd  <->  3rd = 4th
    ABELIANNESS = "abelianness"  # 1st = 2nd  ->  3rd = 4th


@dataclass(frozen=True)
class TermConditionInstance:
    """Result of one quadruple-closure run.

    closure is the full subalgebra of A^4 (rank-encoded, sorted) when the
    condition holds; when it fails the run stops early, closure is None and
    violation carries the offending quadruple.
    """

    algebra: FiniteAlgebra
    kind: TermConditionKind
    generators: tuple[tuple[int, int, int, int], ...]
    holds: bool
    closure: tuple[int, ...] | None
    violation: tuple[int, int, int, int] | None


def _components(ranks: np.ndarray, n: int) -> tuple[np.ndarray, ...]:
    return tuple((ranks // n ** (3 - c)) % n for c in range(4))


def _violations(kind: TermConditionKind, comps) -> np.ndarray:
    c0, c1, c2, c3 = comps
    eq01 = c0 == c1
    eq23 = c2 == c3
    if kind is TermConditionKind.CENTRALITY:
        return eq01 != eq23
    return eq01 & ~eq23


def _quad_closure(
    alg: FiniteAlgebra,
    generators: Iterable[tuple[int, int, int, int]],
    kind: TermConditionKind,
    budget: int | None = None,
) -> TermConditionInstance:
    budget = DEFAULT_BUDGET if budget is None else budget
    n = alg.size
    if n**4 > budget:
        raise BudgetError(f"A^4 has {n**4} quadruples, over budget {budget}")
    gens = tuple(tuple(int(x) for x in q) for q in generators)
    ranks = []
    for q in gens:
        r = 0
        for x in q:
            r = r * n + x
        ranks.append(r)
    # Nullary ops contribute constant quadruples.
    for op_index, (_, arity) in enumerate(alg.signature):
        if arity == 0:
            c = alg.tables[op_index][0]
            ranks.append(((c * n + c) * n + c) * n + c)
    member = np.zeros(n**4, dtype=bool)
    start = np.unique(np.array(ranks, dtype=np.int64))
    member[start] = True

    def fail(batch: np.ndarray) -> TermConditionInstance | None:
        bad = _violations(kind, _components(batch, n))
        if bad.any():
            quad = tuple(int(c[np.argmax(bad)]) for c in _components(batch, n))
            return TermConditionInstance(alg, kind, gens, False, None, quad)
        return None

    failed = fail(start)
    if failed is not None:
        return failed

    all_ranks = start.copy()
    queue = [start]
    unary = [i for i, (_, a) in enumerate(alg.signature) if a == 1]
    binary = [i for i, (_, a) in enumerate(alg.signature) if a == 2]
    ternary = [i for i, (_, a) in enumerate(alg.signature) if a == 3]
    higher = [(i, a) for i, (_, a) in enumerate(alg.signature) if a >= 4]

    def apply_vec(op_index: int, arg_ranks: tuple[np.ndarray, ...]) -> np.ndarray:
        table = alg.op_array(op_index)
        out = np.zeros(arg_ranks[0].shape, dtype=np.int64)
        for c in range(4):
            comps = tuple((r // n ** (3 - c)) % n for r in arg_ranks)
            out = out * n + table[comps]
        return out

    def push_new(cand: np.ndarray) -> TermConditionInstance | None:
        nonlocal all_ranks
        cand = np.unique(cand)
        cand = cand[~member[cand]]
        if cand.size == 0:
            return None
        member[cand] = True
        failed = fail(cand)
        if failed is not None:
            return failed
        all_ranks = np.concatenate([all_ranks, cand])
        queue.append(cand)
        return None

    while queue:
        batch = queue.pop()
        for op_index in unary:
            failed = push_new(apply_vec(op_index, (batch,)))
            if failed is not None:
                return failed
        for op_index in binary:
            known = all_ranks
            chunk = max(1, 2_000_000 // max(1, known.size))
            for lo in range(0, batch.size, chunk):
                part = batch[lo : lo + chunk]
                left = np.repeat(part, known.size)
                right = np.tile(known, part.size)
                failed = push_new(apply_vec(op_index, (left, right)))
                if failed is not None:
                    return failed
                failed = push_new(apply_vec(op_index, (right, left)))
                if failed is not None:
                    return failed
        for op_index in ternary:
            # One new element per call, vectorized over the other two slots.
            known = all_ranks
            total = known.size * known.size
            step = max(1, 4_000_000 // max(1, batch.size))
            for lo in range(0, total, step):
                idx = np.arange(lo, min(lo + step, total))
                grid_a = known[idx // known.size]
                grid_b = known[idx % known.size]
                for x in batch.tolist():
                    xs = np.full(grid_a.size, x, dtype=np.int64)
                    for args in (
                        (xs, grid_a, grid_b),
                        (grid_a, xs, grid_b),
                        (grid_a, grid_b, xs),
                    ):
                        failed = push_new(apply_vec(op_index, args))
                        if failed is not None:
                            return failed
        for op_index, arity in higher:
            # Desk-scale fallback; bundled signatures stop at arity 3.
            known_list = all_ranks.tolist()
            for x in batch.tolist():
                for pos in range(arity):
                    for rest in product(known_list, repeat=arity - 1):
                        args = rest[:pos] + (x,) + rest[pos:]
                        arrs = tuple(np.array([v]) for v in args)
                        failed = push_new(apply_vec(op_index, arrs))
                        if failed is not None:
                            return failed
    closure = tuple(int(r) for r in np.sort(all_ranks))
    return TermConditionInstance(alg, kind, gens, True, closure, None)


def central_pair_test(
    alg: FiniteAlgebra, a: int, b: int, budget: int | None = None
) -> TermConditionInstance:
    """Term-condition run deciding whether (a, b) lies in the center."""
    n = alg.size
    gens = [(x, y, x, y) for x in range(n) for y in range(n)]
    gens.append((a, a, b, b))
    return _quad_closure(alg, gens, TermConditionKind.CENTRALITY, budget)


@lru_cache(maxsize=256)
def center(alg: FiniteAlgebra, budget: int | None = None) -> Partition:
    """The center of alg as a partition.

    Raises VerificationError if the passing relation is not an equivalence or
    not a congruence; both would indicate an implementation bug, since the
    center is guaranteed to be an Abelian congruence.
    """
    n = alg.size
    passing: set[tuple[int, int]] = set()
    for a in range(n):
        for b in range(a + 1, n):
            if central_pair_test(alg, a, b, budget).holds:
                passing.add((a, b))
    part = Partition.from_pairs(n, passing)
    for block in part.blocks():
        for i, a in enumerate(block):
            for b in block[i + 1 :]:
                if (a, b) not in passing:
                    raise VerificationError(
                        f"center relation is not transitive: ({a}, {b}) missing"
                    )
    from .algebra import is_compatible

    if not is_compatible(alg, part):
        raise VerificationError("center relation failed the congruence check")
    return part


def is_central(alg: FiniteAlgebra, theta: Partition, budget: int | None = None) -> bool:
    """True iff theta is contained in the center of alg."""
    from .algebra import is_compatible

    if not is_compatible(alg, theta):
        raise ValueError("is_central requires a congruence")
    return theta.refines(center(alg, budget))


def is_abelian_congruence(
    alg: FiniteAlgebra, theta: Partition, budget: int | None = None
) -> bool:
    """Term-condition test: parameters range over theta-related tuples only."""
    from .algebra import is_compatible

    if not is_compatible(alg, theta):
        raise ValueError("is_abelian_congruence requires a congruence")
    gens: list[tuple[int, int, int, int]] = []
    for x, y in theta.pairs():
        gens.append((x, x, y, y))
        gens.append((x, y, x, y))
    return _quad_closure(alg, gens, TermConditionKind.ABELIANNESS, budget).holds


@dataclass(frozen=True)
class UpperCentralSeries:
    """zeta_0 <= zeta_1 <= ... with the nilpotence verdict."""

    series: tuple[Partition, ...]
    nilpotent: bool
    nilpotence_class: int | None
    stall_index: int | None

    def to_json(self) -> dict:
        return {
            "series": [p.to_json() for p in self.series],
            "class": self.nilpotence_class if self.nilpotent else "not-nilpotent",
            "stall_index": self.stall_index,
        }


@lru_cache(maxsize=256)
def upper_central_series(
    alg: FiniteAlgebra, budget: int | None = None
) -> UpperCentralSeries:
    """Iterate zeta_{i+1}/zeta_i = center(alg/zeta_i) until 1_A or a stall."""
    n = alg.size
    zetas = [Partition.zero(n)]
    while True:
        cur = zetas[-1]
        if cur.is_one():
            return UpperCentralSeries(tuple(zetas), True, len(zetas) - 1, None)
        quot, block_map = quotient(alg, cur)
        zq = center(quot, budget)
        nxt = Partition.from_keys(zq.ids[block_map[x]] for x in range(n))
        if nxt == cur:
            return UpperCentralSeries(tuple(zetas), False, None, len(zetas) - 1)
        zetas.append(nxt)


def nilpotence_class(alg: FiniteAlgebra, budget: int | None = None) -> int | None:
    """Nilpotence class of alg, or None when not nilpotent."""
    return upper_central_series(alg, budget).nilpotence_class
