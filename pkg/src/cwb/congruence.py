"""Congruence engine: principal congruences, lattices, monoliths, witnesses.

Principal congruences are computed by Mal'tsev's congruence-generation lemma:
breadth-first closure of the generating pair under one-hole translations,
followed by a union-find transitive closure. Witness search works in the
subalgebra of A^2 generated by the start pair and the constant pairs, where
node (p(a), p(b)) carries the unary polynomial p that produced it; the cost
of a node is the number of parameters (constant-pair uses) in its derivation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np

from .algebra import FiniteAlgebra, is_compatible, rank_tuple
from .errors import DEFAULT_BUDGET, BudgetError
from .partition import Partition
from .terms import App, Term, Var, eval_term


def is_congruence(alg: FiniteAlgebra, part: Partition) -> bool:
    """True iff the partition is compatible with every operation of alg."""
    return is_compatible(alg, part)


def meet(p1: Partition, p2: Partition) -> Partition:
    return p1.meet(p2)


def join(alg: FiniteAlgebra, p1: Partition, p2: Partition) -> Partition:
    """Join of two congruences: partition join, then a congruence check."""
    out = p1.join(p2)
    if not is_compatible(alg, out):
        raise AssertionError("join of congruences failed the congruence check")
    return out


def compose(p1: Partition, p2: Partition) -> frozenset[tuple[int, int]]:
    return p1.compose(p2)


def permute_check(alg: FiniteAlgebra, p1: Partition, p2: Partition) -> bool:
    """Extensional test of p1 o p2 = p2 o p1."""
    if p1.n != alg.size or p2.n != alg.size:
        raise ValueError("universe size mismatch")
    return p1.compose(p2) == p2.compose(p1)


@lru_cache(maxsize=512)
def _translations(alg: FiniteAlgebra) -> np.ndarray:
    """All distinct one-hole unary maps x -> f(e.., x, ..e') as an (m, n) array."""
    n = alg.size
    maps: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for op_index, (_, arity) in enumerate(alg.signature):
        if arity == 0:
            continue
        table = alg.tables[op_index]
        for pos in range(arity):
            for params in product(range(n), repeat=arity - 1):
                row = tuple(
                    table[rank_tuple(params[:pos] + (x,) + params[pos:], n)]
                    for x in range(n)
                )
                if row not in seen:
                    seen.add(row)
                    maps.append(row)
    if not maps:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(maps, dtype=np.int64)


@lru_cache(maxsize=65536)
def principal_congruence(alg: FiniteAlgebra, a: int, b: int) -> Partition:
    """Least congruence identifying a and b."""
    n = alg.size
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"pair ({a}, {b}) out of range")
    if a == b:
        return Partition.zero(n)
    g = _translations(alg)
    visited = np.zeros((n, n), dtype=bool)
    visited[a, b] = True
    front_u = np.array([a])
    front_v = np.array([b])
    while front_u.size and g.size:
        cand_u = g[:, front_u].ravel()
        cand_v = g[:, front_v].ravel()
        fresh = ~visited[cand_u, cand_v]
        cand_u, cand_v = cand_u[fresh], cand_v[fresh]
        visited[cand_u, cand_v] = True
        if cand_u.size:
            front_u, front_v = np.unique(np.stack([cand_u, cand_v]), axis=1)
        else:
            front_u, front_v = cand_u, cand_v
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    us, vs = np.nonzero(visited)
    for u, v in zip(us.tolist(), vs.tolist()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return Partition.from_root_map(find(x) for x in range(n))


@lru_cache(maxsize=512)
def congruence_lattice(
    alg: FiniteAlgebra, budget: int | None = None
) -> tuple[Partition, ...]:
    """All congruences of alg: principal ones closed under join, plus 0 and 1."""
    budget = DEFAULT_BUDGET if budget is None else budget
    n = alg.size
    found: set[Partition] = {Partition.zero(n)}
    for a in range(n):
        for b in range(a + 1, n):
            found.add(principal_congruence(alg, a, b))
    worklist = list(found)
    while worklist:
        theta = worklist.pop()
        for other in list(found):
            j = theta.join(other)
            if j not in found:
                found.add(j)
                worklist.append(j)
                if len(found) > budget:
                    raise BudgetError(
                        f"congruence lattice exceeded budget {budget}"
                    )
    return tuple(sorted(found, key=lambda p: p.sort_key()))


def uniformity_check(alg: FiniteAlgebra, part: Partition) -> bool:
    """True iff all blocks of the congruence have the same size."""
    if part.n != alg.size:
        raise ValueError("universe size mismatch")
    sizes = {len(block) for block in part.blocks()}
    return len(sizes) <= 1


@dataclass(frozen=True)
class SIWitness:
    """Monolith plus its nontrivial (critical) pairs."""

    monolith: Partition
    critical_pairs: tuple[tuple[int, int], ...]


@lru_cache(maxsize=512)
def si_check(alg: FiniteAlgebra) -> SIWitness | None:
    """Monolith of alg if it is subdirectly irreducible, else None."""
    n = alg.size
    principals = [
        principal_congruence(alg, a, b) for a in range(n) for b in range(a + 1, n)
    ]
    principals = [p for p in principals if not p.is_zero()]
    if not principals:
        return None
    monolith = principals[0]
    for p in principals[1:]:
        monolith = monolith.meet(p)
        if monolith.is_zero():
            return None
    critical = tuple(
        (c, d) for c in range(n) for d in range(n) if c != d and monolith.related(c, d)
    )
    return SIWitness(monolith, critical)


# ---------------------------------------------------------------------------
# Witness search over the pair graph.


@dataclass(frozen=True)
class UnaryPolynomialWitness:
    """Unary polynomial p(x) = term(x, d1..dk); complexity = k parameters.

    Variable 0 of the term is the distinguished x; variables 1..k are the
    parameter slots, in the order the values appear in params.
    """

    term: Term
    params: tuple[int, ...]

    @property
    def complexity(self) -> int:
        return len(self.params)

    def apply(self, alg: FiniteAlgebra, x: int) -> int:
        assignment = {0: x}
        assignment.update({i + 1: v for i, v in enumerate(self.params)})
        return eval_term(alg, self.term, assignment)

    def to_json(self, alg: FiniteAlgebra) -> dict:
        from .terms import render_term

        names = ["x"] + [f"y{i + 1}" for i in range(len(self.params))]
        return {
            "term": render_term(self.term, alg.signature, names),
            "params": list(self.params),
            "complexity": self.complexity,
        }


def _search_pairs(
    alg: FiniteAlgebra,
    start: tuple[int, int],
    max_complexity: int | None,
    accept: Callable[[int, int], bool] | None,
    budget: int | None = None,
):
    """Lightest-derivation search over the pair subalgebra of A^2.

    The set {(p(a), p(b)) : p a unary polynomial} is the subalgebra of A^2
    generated by the start pair together with the constant pairs, so nodes
    are expanded by combining them with every already-settled node under
    every operation. Cost = number of parameters: the start is free,
    each constant-pair use costs 1, nullary-op constants are free.

    Returns (dist, parents, hit): least costs for settled pairs, derivation
    parents for witness reconstruction, and the first accepted settled pair.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    n = alg.size
    if n * n > budget:
        raise BudgetError(f"pair graph has {n * n} nodes, over budget {budget}")
    dist: dict[tuple[int, int], int] = {}
    parents: dict[tuple[int, int], tuple] = {}
    heap: list = []
    seq = 0

    def push(cost: int, node: tuple[int, int], via: tuple) -> None:
        nonlocal seq
        if node in dist:
            return
        if max_complexity is not None and cost > max_complexity:
            return
        seq += 1
        heapq.heappush(heap, (cost, seq, node, via))

    push(0, start, ())
    for op_index, (_, arity) in enumerate(alg.signature):
        if arity == 0:
            c = alg.tables[op_index][0]
            push(0, (c, c), (op_index, ()))
    for c in range(n):
        push(1, (c, c), ("param",))

    settled: list[tuple[int, int]] = []
    hit = None
    while heap:
        cost, _, pair, via = heapq.heappop(heap)
        if pair in dist:
            continue
        dist[pair] = cost
        parents[pair] = via
        settled.append(pair)
        if accept is not None and accept(*pair):
            hit = pair
            break
        for op_index, (_, arity) in enumerate(alg.signature):
            if arity == 0:
                continue
            table = alg.tables[op_index]
            if arity == 1:
                nxt = (table[pair[0]], table[pair[1]])
                push(cost, nxt, (op_index, (pair,)))
                continue
            if arity == 2:
                for other in settled:
                    oc = dist[other]
                    left = (
                        table[pair[0] * n + other[0]],
                        table[pair[1] * n + other[1]],
                    )
                    push(cost + oc, left, (op_index, (pair, other)))
                    right = (
                        table[other[0] * n + pair[0]],
                        table[other[1] * n + pair[1]],
                    )
                    push(cost + oc, right, (op_index, (other, pair)))
                continue
            # arity >= 3: all settled combinations using the new pair.
            for args in product(settled, repeat=arity):
                if pair not in args:
                    continue
                total = cost + sum(dist[q] for q in args if q != pair)
                nxt = (
                    table[rank_tuple([q[0] for q in args], n)],
                    table[rank_tuple([q[1] for q in args], n)],
                )
                push(total, nxt, (op_index, args))
    return dist, parents, hit


def _reconstruct_witness(
    parents: dict, pair: tuple[int, int]
) -> UnaryPolynomialWitness:
    """Build the witness term from derivation parents.

    Derivation sub-results are shared, so a parameter pair used several
    times binds one parameter variable (complexity never exceeds the
    search cost).
    """
    params: list[int] = []
    memo: dict[tuple[int, int], Term] = {}

    def build(node: tuple[int, int]) -> Term:
        cached = memo.get(node)
        if cached is not None:
            return cached
        info = parents[node]
        if info == ():
            term: Term = Var(0)
        elif info[0] == "param":
            params.append(node[0])
            term = Var(len(params))
        else:
            op_index, children = info
            term = App(op_index, tuple(build(c) for c in children))
        memo[node] = term
        return term

    term = build(pair)
    return UnaryPolynomialWitness(term, tuple(params))


def membership_witness(
    alg: FiniteAlgebra,
    target: tuple[int, int],
    generator: tuple[int, int],
    max_complexity: int,
    budget: int | None = None,
) -> UnaryPolynomialWitness | None:
    """Unary polynomial p with (p(a), p(b)) = target, complexity <= cap.

    None means no witness exists within the complexity cap (the bounded
    search space is exhausted, so absence is definitive); a blown budget
    raises instead.
    """
    target = (int(target[0]), int(target[1]))
    _, parents, hit = _search_pairs(
        alg,
        (int(generator[0]), int(generator[1])),
        max_complexity,
        accept=lambda c, d: (c, d) == target,
        budget=budget,
    )
    if hit is None:
        return None
    witness = _reconstruct_witness(parents, hit)
    a, b = generator
    got = (witness.apply(alg, a), witness.apply(alg, b))
    if got != target:
        raise AssertionError(f"witness reconstruction produced {got}, not {target}")
    return witness


def reachable_pairs(
    alg: FiniteAlgebra,
    start: tuple[int, int],
    max_complexity: int | None = None,
    budget: int | None = None,
) -> dict[tuple[int, int], int]:
    """Least witness complexity for every pair-graph node reachable from start."""
    dist, _, _ = _search_pairs(alg, tuple(start), max_complexity, None, budget)
    return dist


def polynomial_image_pairs(
    alg: FiniteAlgebra, a: int, b: int
) -> frozenset[tuple[int, int]]:
    """All pairs (p(a), p(b)) over all unary polynomials p, no cost cap."""
    return frozenset(reachable_pairs(alg, (a, b)))
