"""Free-algebra element generation over subpowers, Mal'tsev term search,
commutator-word (absorbing element) catalogs, and the empirical bound M.

Elements of the free algebra on v generators are realized as value vectors
over an index set I of v-tuples (rank-encoded); each vector carries a minimal
witness term. Vectors are deduplicated by content, BFS level order plus the
canonical term order makes witness selection deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable

import numpy as np

from .algebra import FiniteAlgebra, rank_tuple, unrank_tuple
from .errors import DEFAULT_BUDGET, BudgetError
from .terms import App, Term, Var, render_term, term_key, term_table


@dataclass(frozen=True)
class SubpowerCatalog:
    """Generated subalgebra of base^I with one minimal witness term per vector."""

    base: FiniteAlgebra
    nvars: int
    index_set: tuple[int, ...]
    vectors: tuple[tuple[int, ...], ...]
    witnesses: tuple[Term, ...]
    complete: bool

    def __len__(self) -> int:
        return len(self.vectors)

    def find(self, vector: Iterable[int]) -> int | None:
        vector = tuple(vector)
        for i, v in enumerate(self.vectors):
            if v == vector:
                return i
        return None

    def verify(self) -> None:
        """Re-evaluate every witness pointwise and compare with its vector."""
        idx = np.array(self.index_set, dtype=np.int64)
        for vec, wit in zip(self.vectors, self.witnesses):
            table = term_table(self.base, wit, self.nvars)
            if tuple(int(x) for x in table[idx]) != vec:
                raise AssertionError(
                    f"witness {wit!r} does not reproduce its stored vector"
                )

    def to_json(self) -> dict:
        return {
            "base": self.base.name,
            "nvars": self.nvars,
            "index_encoding": "row-major rank of variable tuples over the base universe",
            "index_set": list(self.index_set),
            "complete": self.complete,
            "elements": [
                {"vector": list(v), "term": render_term(w, self.base.signature)}
                for v, w in zip(self.vectors, self.witnesses)
            ],
        }


def generate_free(
    alg: FiniteAlgebra,
    nvars: int,
    index_set: Iterable[int] | None = None,
    budget: int | None = None,
    stop_vector: tuple[int, ...] | None = None,
) -> SubpowerCatalog:
    """BFS closure of the projection vectors under all operations.

    Levels are committed in canonical term order; the first level containing a
    vector keeps the canonically least witness discovered in that level.
    Truncation (budget) and early stop (stop_vector found) clear the complete
    flag; reaching the fixpoint sets it.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    n = alg.size
    if index_set is None:
        ranks = tuple(range(n**nvars))
    else:
        ranks = tuple(sorted(set(int(r) for r in index_set)))
        if not ranks:
            raise ValueError("index set must be nonempty")
        if ranks[0] < 0 or ranks[-1] >= n**nvars:
            raise ValueError("index set rank out of range")
    coords = np.array(
        [unrank_tuple(r, n, nvars) for r in ranks], dtype=np.int64
    )  # (|I|, nvars)

    store: dict[bytes, int] = {}
    matrix: list[np.ndarray] = []
    witnesses: list[Term] = []
    stop_bytes = (
        np.array(stop_vector, dtype=np.int64).tobytes()
        if stop_vector is not None
        else None
    )

    def vec_bytes(v: np.ndarray) -> bytes:
        return v.tobytes()

    # Level 0: projections.
    pending: dict[bytes, tuple[tuple, Term, np.ndarray]] = {}
    for j in range(nvars):
        v = coords[:, j].copy()
        t = Var(j)
        key = vec_bytes(v)
        if key not in pending or term_key(t) < pending[key][0]:
            pending[key] = (term_key(t), t, v)

    complete = False
    stopped = False
    truncated = False
    level_start = 0
    first_level = True
    while pending:
        for key in sorted(pending, key=lambda k: pending[k][0]):
            if len(matrix) >= budget:
                truncated = True
                break
            _, t, v = pending[key]
            store[key] = len(matrix)
            matrix.append(v)
            witnesses.append(t)
        if truncated:
            break
        if stop_bytes is not None and stop_bytes in store:
            stopped = True
            break
        prev_start, level_start = level_start, len(matrix)
        if first_level:
            prev_start = 0
        pending = {}

        class _LevelOverBudget(Exception):
            pass

        def offer(vec: np.ndarray, term: Term) -> None:
            key = vec_bytes(vec)
            if key in store:
                return
            cur = pending.get(key)
            if cur is None and len(pending) + len(matrix) >= budget:
                raise _LevelOverBudget
            k = term_key(term)
            if cur is None or k < cur[0]:
                pending[key] = (k, term, vec)

        last = range(prev_start, level_start)
        # The committed matrix is frozen while a level expands, so binary
        # combinations batch against the whole stack in two lookups per item.
        stacked = np.stack(matrix)
        try:
            for op_index, (_, arity) in enumerate(alg.signature):
                table = alg.op_array(op_index)
                if arity == 0:
                    if first_level:
                        offer(
                            np.full(len(ranks), int(table[()]), dtype=np.int64),
                            App(op_index),
                        )
                    continue
                if arity == 1:
                    for i in last:
                        offer(table[matrix[i]], App(op_index, (witnesses[i],)))
                    continue
                if arity == 2:
                    for i in last:
                        vi = matrix[i]
                        left = table[vi[None, :], stacked]
                        for j in range(len(matrix)):
                            offer(left[j], App(op_index, (witnesses[i], witnesses[j])))
                        if prev_start:
                            right = table[stacked[:prev_start], vi[None, :]]
                            for j in range(prev_start):
                                offer(
                                    right[j],
                                    App(op_index, (witnesses[j], witnesses[i])),
                                )
                    continue
                if arity == 3:
                    # Batch the final slot; the first two run over all pairs
                    # that keep at least one argument in the last level.
                    for i in range(len(matrix)):
                        for j in range(len(matrix)):
                            both_old = i < prev_start and j < prev_start
                            out = table[matrix[i][None, :], matrix[j][None, :], stacked]
                            lo = 0 if not both_old else prev_start
                            for k in range(lo, len(matrix)):
                                offer(
                                    out[k],
                                    App(
                                        op_index,
                                        (witnesses[i], witnesses[j], witnesses[k]),
                                    ),
                                )
                    continue
                # arity >= 4: generic fallback, >= 1 argument in the last level.
                for args in product(range(len(matrix)), repeat=arity):
                    if not any(a in last for a in args):
                        continue
                    vecs = tuple(matrix[a] for a in args)
                    offer(
                        table[vecs], App(op_index, tuple(witnesses[a] for a in args))
                    )
        except _LevelOverBudget:
            truncated = True
        first_level = False
        if not pending and not truncated:
            complete = True
            break

    catalog = SubpowerCatalog(
        base=alg,
        nvars=nvars,
        index_set=ranks,
        vectors=tuple(tuple(int(x) for x in v) for v in matrix),
        witnesses=tuple(witnesses),
        complete=complete and not stopped and not truncated,
    )
    catalog.verify()
    return catalog


@dataclass(frozen=True)
class MaltsevWitness:
    """Ternary term with m(x,y,y) = x = m(y,y,x) on the base algebra."""

    term: Term
    checked_instances: tuple[int, int]


@dataclass(frozen=True)
class MaltsevResult:
    witness: MaltsevWitness | None
    complete: bool

    @property
    def status(self) -> str:
        if self.witness is not None:
            return "found"
        return "absent" if self.complete else "unknown"


@lru_cache(maxsize=256)
def find_maltsev(alg: FiniteAlgebra, budget: int | None = None) -> MaltsevResult:
    """Search the free algebra on 3 generators for a Mal'tsev term.

    The index set is restricted to the identity-relevant coordinates
    C = {(a,b,b)} ∪ {(b,b,a)}; a hit is re-verified on the full algebra.
    "absent" requires the restricted catalog to be complete; a budget
    truncation yields status "unknown".
    """
    n = alg.size
    ranks: dict[int, int] = {}
    for a in range(n):
        for b in range(n):
            ranks[rank_tuple((a, b, b), n)] = a
            ranks[rank_tuple((b, b, a), n)] = a
    index_set = tuple(sorted(ranks))
    target = tuple(ranks[r] for r in index_set)
    catalog = generate_free(
        alg, 3, index_set, budget=budget, stop_vector=target
    )
    pos = catalog.find(target)
    if pos is None:
        return MaltsevResult(None, catalog.complete)
    term = catalog.witnesses[pos]
    m3 = term_table(alg, term, 3).reshape((n, n, n))
    xs = np.arange(n)
    first = m3[xs[:, None], xs[None, :], xs[None, :]] == xs[:, None]
    second = m3[xs[None, :], xs[None, :], xs[:, None]] == xs[:, None]
    if not (bool(first.all()) and bool(second.all())):
        raise AssertionError("restricted-index Mal'tsev hit failed full verification")
    return MaltsevResult(MaltsevWitness(term, (n * n, n * n)), catalog.complete)


@lru_cache(maxsize=128)
def binary_term_catalog(alg: FiniteAlgebra, budget: int | None = None) -> SubpowerCatalog:
    """Complete catalog of the free algebra on two generators over A^2."""
    catalog = generate_free(alg, 2, None, budget=budget)
    if not catalog.complete:
        raise BudgetError("binary term catalog truncated; raise the budget")
    return catalog


@dataclass(frozen=True)
class AbsorbingCatalog:
    """Commutator words in nvars variables plus the zero variable z.

    Elements are (vector, witness) pairs from the free algebra on
    nvars + 1 generators (variable nvars is z), filtered by the absorbing
    condition: substituting z for any single x_i forces the value of z.
    """

    nvars: int
    elements: tuple[tuple[tuple[int, ...], Term], ...]
    complete: bool
    z_vector: tuple[int, ...]

    def nontrivial(self) -> tuple[tuple[tuple[int, ...], Term], ...]:
        return tuple((v, t) for v, t in self.elements if v != self.z_vector)


@lru_cache(maxsize=128)
def absorbing_catalog(
    alg: FiniteAlgebra, nvars: int, budget: int | None = None
) -> AbsorbingCatalog:
    """Filter the free algebra on nvars+1 generators for absorbing elements."""
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    n = alg.size
    total_vars = nvars + 1
    catalog = generate_free(alg, total_vars, None, budget=budget)
    size = n**total_vars
    comp = [
        (np.arange(size) // n ** (total_vars - 1 - c)) % n for c in range(total_vars)
    ]
    z_comp = comp[nvars]
    masks = [comp[i] == z_comp for i in range(nvars)]
    kept = []
    for vec, wit in zip(catalog.vectors, catalog.witnesses):
        arr = np.array(vec, dtype=np.int64)
        if all(bool((arr[m] == z_comp[m]).all()) for m in masks):
            kept.append((vec, wit))
    z_vector = tuple(int(x) for x in z_comp)
    return AbsorbingCatalog(nvars, tuple(kept), catalog.complete, z_vector)


@dataclass(frozen=True)
class ArityStatus:
    nvars: int
    complete: bool
    nontrivial_count: int


@dataclass(frozen=True)
class MBoundResult:
    """Empirical commutator-word bound with its certification status."""

    m_emp: int
    max_arity: int
    per_arity: tuple[ArityStatus, ...]

    @property
    def complete(self) -> bool:
        return all(s.complete for s in self.per_arity)

    @property
    def status(self) -> str:
        return "complete" if self.complete else "partial"


def empirical_M(
    alg: FiniteAlgebra, max_arity: int, budget: int | None = None
) -> MBoundResult:
    """Largest arity <= max_arity carrying a nontrivial commutator word.

    An incomplete arity still counts toward m_emp when a nontrivial element
    was found (existence is certain); completeness of every arity is what
    certifies m_emp as exact up to the ceiling.
    """
    if max_arity < 1:
        raise ValueError("max_arity must be >= 1")
    m_emp = 0
    statuses = []
    for nvars in range(1, max_arity + 1):
        cat = absorbing_catalog(alg, nvars, budget)
        nontrivial = cat.nontrivial()
        if nontrivial:
            m_emp = nvars
        statuses.append(ArityStatus(nvars, cat.complete, len(nontrivial)))
    return MBoundResult(m_emp, max_arity, tuple(statuses))


@dataclass(frozen=True)
class VarietyBounds:
    """Bounds parameterizing the congruence formulas for V(A).

    n_bound defaults to k * m_emp + 2, mirroring the witness accounting of
    the series descent: at most k polynomials of complexity at most M,
    composed with one final polynomial of complexity 2.
    """

    nilpotence_class: int
    m_emp: int
    m_ceiling: int
    m_complete: bool
    n_bound: int

    def __post_init__(self) -> None:
        if self.n_bound < 2:
            raise ValueError("n_bound must be >= 2")


def variety_bounds(
    alg: FiniteAlgebra,
    max_arity: int = 3,
    budget: int | None = None,
    n_override: int | None = None,
) -> VarietyBounds:
    from .centrality import nilpotence_class

    k = nilpotence_class(alg, budget)
    if k is None:
        raise ValueError(f"{alg.name} is not nilpotent; variety bounds undefined")
    m = empirical_M(alg, max_arity, budget)
    n_bound = n_override if n_override is not None else k * m.m_emp + 2
    return VarietyBounds(k, m.m_emp, max_arity, m.complete, n_bound)
