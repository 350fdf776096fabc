"""Congruence formulas: Phi construction and evaluation, bounded Psi witness
search, commutator-word decomposition, dpsc verification, and the Theta
sentence.

Psi is never materialized as a disjunction over the free algebra on N+1
generators; on a finite algebra the defined relation is exactly "reachable in
the pair graph with at most N parameters", so it is evaluated by bounded
witness search.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

from .algebra import FiniteAlgebra, unrank_tuple
from .congruence import (
    UnaryPolynomialWitness,
    _reconstruct_witness,
    _search_pairs,
    principal_congruence,
    reachable_pairs,
    si_check,
)
from .centrality import upper_central_series
from .errors import BudgetError, VerificationError
from .free_terms import (
    VarietyBounds,
    absorbing_catalog,
    binary_term_catalog,
    find_maltsev,
    variety_bounds,
)
from .terms import Term, Var, render_term, substitute, term_table, term_vars


@dataclass(frozen=True)
class PhiFormula:
    """Phi(u,v,x,y) = OR over t in T of (t(x,y) = m(u,v,y) and t(y,y) = y)."""

    base: FiniteAlgebra
    maltsev: Term
    terms: tuple[Term, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def to_json(self) -> dict:
        return {
            "base": self.base.name,
            "maltsev": render_term(self.maltsev, self.base.signature),
            "t_count": len(self.terms),
            "terms": [render_term(t, self.base.signature) for t in self.terms],
        }


def build_phi(alg: FiniteAlgebra, budget: int | None = None) -> PhiFormula:
    """Package the Mal'tsev term and the binary term representatives.

    Raises ValueError when no Mal'tsev term exists (V(A) is not congruence
    permutable, so the standing hypotheses fail) and BudgetError when the
    binary term catalog cannot be completed.
    """
    result = find_maltsev(alg, budget)
    if result.witness is None:
        if result.complete:
            raise ValueError(
                f"{alg.name} has no Mal'tsev term: V({alg.name}) is not "
                "congruence permutable, hypothesis fails"
            )
        raise BudgetError("Mal'tsev search exhausted its budget; raise the budget")
    catalog = binary_term_catalog(alg, budget)
    return PhiFormula(alg, result.witness.term, catalog.witnesses)


def _check_signature(phi: PhiFormula, s: FiniteAlgebra) -> None:
    if s.signature != phi.base.signature:
        raise ValueError(
            f"signature mismatch: {s.name} differs from {phi.base.name}"
        )


@lru_cache(maxsize=512)
def _phi_tables(phi: PhiFormula, s: FiniteAlgebra):
    n = s.size
    t_tables = tuple(term_table(s, t, 2).reshape(n, n) for t in phi.terms)
    m_table = term_table(s, phi.maltsev, 3).reshape(n, n, n)
    return t_tables, m_table


def eval_phi(
    phi: PhiFormula, s: FiniteAlgebra, u: int, v: int, x: int, y: int
) -> bool:
    """Evaluate Phi(u,v,x,y) on s by scanning the term list."""
    _check_signature(phi, s)
    t_tables, m_table = _phi_tables(phi, s)
    target = m_table[u, v, y]
    return any(t2[x, y] == target and t2[y, y] == y for t2 in t_tables)


def phi_relation(
    phi: PhiFormula, s: FiniteAlgebra, x: int, y: int
) -> frozenset[tuple[int, int]]:
    """All pairs (u, v) with Phi(u,v,x,y), computed in one vectorized pass."""
    _check_signature(phi, s)
    t_tables, m_table = _phi_tables(phi, s)
    targets = np.unique(
        np.array([t2[x, y] for t2 in t_tables if t2[y, y] == y], dtype=np.int64)
    )
    mask = np.isin(m_table[:, :, y], targets)
    us, vs = np.nonzero(mask)
    return frozenset(zip(us.tolist(), vs.tolist()))


@dataclass(frozen=True)
class PhiVerdict:
    """Comparison of the Phi-defined relation against Cg(a, b).

    Soundness (defined subset of the congruence) must always hold; this is
    the congruence-formula property. Completeness is guaranteed only for
    central principal congruences.
    """

    algebra_name: str
    a: int
    b: int
    sound: bool
    complete: bool
    defined_size: int
    congruence_size: int

    @property
    def defines(self) -> bool:
        return self.sound and self.complete

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra_name,
            "pair": [self.a, self.b],
            "sound": self.sound,
            "complete": self.complete,
            "defines": self.defines,
        }


def phi_defines_check(
    phi: PhiFormula, s: FiniteAlgebra, a: int, b: int
) -> PhiVerdict:
    """Exhaustively compare {(u,v) : Phi(u,v,a,b)} with Cg^S(a,b)."""
    defined = phi_relation(phi, s, a, b)
    cg = principal_congruence(s, a, b)
    cg_pairs = frozenset(cg.pairs())
    return PhiVerdict(
        algebra_name=s.name,
        a=a,
        b=b,
        sound=defined <= cg_pairs,
        complete=cg_pairs <= defined,
        defined_size=len(defined),
        congruence_size=len(cg_pairs),
    )


@dataclass(frozen=True)
class PsiConfig:
    """Bounds and strategy for the Psi witness search.

    The stream limits bound the diagnostic fallback searches; the primary
    path is the complexity-capped pair-graph search.
    """

    bounds: VarietyBounds
    strategy: str = "generic-bounded"
    max_absorbing_arity: int = 2
    stream_max_depth: int = 4
    stream_max_size: int = 17

    @property
    def n_bound(self) -> int:
        return self.bounds.n_bound

    def to_json(self) -> dict:
        return {
            "n_bound": self.n_bound,
            "nilpotence_class": self.bounds.nilpotence_class,
            "m_emp": self.bounds.m_emp,
            "m_ceiling": self.bounds.m_ceiling,
            "m_complete": self.bounds.m_complete,
            "strategy": self.strategy,
        }


def default_psi_config(
    alg: FiniteAlgebra,
    max_arity: int = 3,
    budget: int | None = None,
    n_override: int | None = None,
) -> PsiConfig:
    return PsiConfig(bounds=variety_bounds(alg, max_arity, budget, n_override))


class PsiSearchFailure(RuntimeError):
    """No critical pair is reachable within complexity N.

    For a nilpotent algebra with prime-power factors in a congruence
    permutable variety, a critical pair of bounded complexity is guaranteed
    to be reachable, so a failure is flagged loudly: either a falsification
    candidate or an N misconfiguration.
    """

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def psi_search(
    s: FiniteAlgebra,
    a: int,
    b: int,
    cfg: PsiConfig,
    budget: int | None = None,
) -> tuple[int, int, UnaryPolynomialWitness]:
    """Find a critical pair (c, b) in Cg^S(a,b) with witness complexity <= N.

    Memberships are normalized to second coordinate b before searching (the
    Mal'tsev shift Cg(c,d) = Cg(m(c,d,b), b) halves the target space), so
    only pairs (c, b) are accepted. The "series-guided" strategy routes
    through ucs_descent instead of the generic bounded search.
    """
    if a == b:
        raise ValueError("psi_search requires a != b")
    si = si_check(s)
    if si is None:
        raise ValueError(f"{s.name} is not subdirectly irreducible")
    if cfg.strategy == "series-guided":
        try:
            chain = ucs_descent(s, a, b, cfg, budget)
        except DescentFailure as e:
            raise PsiSearchFailure(
                f"series-guided search failed at stage {e.stage} on {s.name}: {e}",
                diagnostics={"algebra": s.name, "pair": [a, b], "stage": e.stage},
            )
        witness = chain.final_witness
        if witness.complexity > cfg.n_bound:
            raise PsiSearchFailure(
                f"series-guided witness complexity {witness.complexity} exceeds "
                f"N = {cfg.n_bound} on {s.name}",
                diagnostics={
                    "algebra": s.name,
                    "pair": [a, b],
                    "complexity": witness.complexity,
                    "n_bound": cfg.n_bound,
                },
            )
        return chain.critical_pair[0], chain.critical_pair[1], witness
    if cfg.strategy != "generic-bounded":
        raise ValueError(f"unknown psi search strategy {cfg.strategy!r}")
    monolith = si.monolith

    def accept(c: int, d: int) -> bool:
        return d == b and c != b and monolith.related(c, b)

    dist, parents, hit = _search_pairs(
        s, (a, b), cfg.n_bound, accept, budget=budget
    )
    if hit is None:
        raise PsiSearchFailure(
            f"no critical pair (c, {b}) reachable from ({a}, {b}) within "
            f"complexity {cfg.n_bound} on {s.name}: falsification candidate "
            "or N misconfiguration",
            diagnostics={
                "algebra": s.name,
                "pair": [a, b],
                "n_bound": cfg.n_bound,
                "reachable_pairs": len(dist),
                "monolith": si.monolith.to_json(),
            },
        )
    witness = _reconstruct_witness(parents, hit)
    got = (witness.apply(s, a), witness.apply(s, b))
    if got != hit:
        raise AssertionError(f"psi witness evaluates to {got}, expected {hit}")
    if witness.complexity > cfg.n_bound:
        raise AssertionError("psi witness exceeded the complexity bound")
    return hit[0], hit[1], witness


# ---------------------------------------------------------------------------
# Diagnostic descent along the upper central series: commutator-word steps
# walk the pair down one center level at a time, then a single binary-term
# step lands on a critical pair.


@dataclass(frozen=True)
class DescentStep:
    stage: int  # index of the zeta the step lands in
    element: int
    witness: UnaryPolynomialWitness


@dataclass(frozen=True)
class DescentChain:
    steps: tuple[DescentStep, ...]
    critical_pair: tuple[int, int]
    final_witness: UnaryPolynomialWitness  # composed, from the original (a, b)


class DescentFailure(RuntimeError):
    def __init__(self, stage: int, message: str):
        super().__init__(message)
        self.stage = stage


def _compose_witnesses(
    outer: UnaryPolynomialWitness, inner: UnaryPolynomialWitness
) -> UnaryPolynomialWitness:
    """(outer o inner)(x); parameters concatenate, complexity adds."""
    shift = len(outer.params)
    shifted = substitute(
        inner.term,
        {i + 1: Var(shift + i + 1) for i in range(len(inner.params))},
    )
    term = substitute(outer.term, {0: shifted})
    return UnaryPolynomialWitness(term, outer.params + inner.params)


def ucs_descent(
    s: FiniteAlgebra,
    a: int,
    b: int,
    cfg: PsiConfig,
    budget: int | None = None,
) -> DescentChain:
    """Walk (a, b) down the upper central series to a critical pair.

    Each series step applies a commutator word w with parameters,
    p(y) = w(y, d, b), landing one center level lower; the final step applies
    a binary term t with p(y) = t(y, b). Fails with the stage index when the
    bounded search finds no step; failures are diagnostics, not
    falsifications.
    """
    if a == b:
        raise ValueError("ucs_descent requires a != b")
    si = si_check(s)
    if si is None:
        raise ValueError(f"{s.name} is not subdirectly irreducible")
    ucs = upper_central_series(s, budget)
    if not ucs.nilpotent:
        raise ValueError(f"{s.name} is not nilpotent")
    zetas = ucs.series
    cg = principal_congruence(s, a, b)
    stage = next(i for i, z in enumerate(zetas) if z.related(a, b))

    cur = a
    steps: list[DescentStep] = []
    composed = UnaryPolynomialWitness(Var(0), ())
    while stage > 1:
        target = stage - 1
        if zetas[target].related(cur, b):
            stage = target
            continue
        found = None
        n = s.size
        for nvars in range(1, cfg.max_absorbing_arity + 1):
            catalog = absorbing_catalog(s, nvars, budget)
            for _, word in catalog.elements:
                tbl = term_table(s, word, nvars + 1)
                for params_rank in range(n ** (nvars - 1)):
                    # Assignment (cur, d_1..d_{nvars-1}, b), row-major rank.
                    rank = cur * n**nvars + params_rank * n + b
                    c_new = int(tbl[rank])
                    if c_new == b or not zetas[target].related(c_new, b):
                        continue
                    d_values = unrank_tuple(params_rank, n, nvars - 1)
                    step_witness = UnaryPolynomialWitness(word, d_values + (b,))
                    found = (c_new, step_witness)
                    break
                if found:
                    break
            if found:
                break
        if not found:
            raise DescentFailure(
                target,
                f"no commutator-word step from ({cur}, {b}) into zeta_{target} "
                f"on {s.name} within arity {cfg.max_absorbing_arity}",
            )
        c_new, step_witness = found
        if not cg.related(c_new, b):
            raise AssertionError("descent step left the principal congruence")
        composed = _compose_witnesses(step_witness, composed)
        steps.append(DescentStep(target, c_new, step_witness))
        cur = c_new
        stage = target

    # Final step: one binary term lands on a critical pair (c, b).
    monolith = si.monolith
    catalog = binary_term_catalog(s, budget)
    n = s.size
    for t in catalog.witnesses:
        tbl = term_table(s, t, 2).reshape(n, n)
        if tbl[b, b] != b:
            continue
        c_final = int(tbl[cur, b])
        if c_final != b and monolith.related(c_final, b):
            final_step = UnaryPolynomialWitness(t, (b,))
            composed = _compose_witnesses(final_step, composed)
            got = (composed.apply(s, a), composed.apply(s, b))
            if got != (c_final, b):
                raise AssertionError("composed descent witness mismatch")
            steps.append(DescentStep(0, c_final, final_step))
            return DescentChain(tuple(steps), (c_final, b), composed)
    raise DescentFailure(
        0, f"no binary-term step from ({cur}, {b}) to a critical pair on {s.name}"
    )


# ---------------------------------------------------------------------------
# Commutator-word decomposition (inclusion-exclusion over variable subsets).


@dataclass(frozen=True)
class CommutatorDecomposition:
    """w(x1..xn, z) = base + c_1 + ... + c_m with u + v := m(u, z, v).

    base is w with every x_i replaced by z; components are indexed by the
    nonempty variable subsets in (size, lex) order and each passes the
    semantic absorbing check; the reconstruction is the right-associated sum
    and is identity-equal to w on the base algebra.
    """

    algebra: FiniteAlgebra
    input_term: Term
    nvars: int
    base: Term
    components: tuple[tuple[tuple[int, ...], Term], ...]
    reconstruction: Term

    def to_json(self) -> dict:
        sig = self.algebra.signature
        names = [f"x{i + 1}" for i in range(self.nvars)] + ["z"]
        return {
            "input": render_term(self.input_term, sig, names),
            "base": render_term(self.base, sig, names),
            "components": [
                {
                    "subset": [i + 1 for i in subset],
                    "term": render_term(term, sig, names),
                }
                for subset, term in self.components
            ],
            "reconstruction": render_term(self.reconstruction, sig, names),
        }


def decompose_commutator(
    alg: FiniteAlgebra,
    w: Term,
    nvars: int,
    maltsev: Term | None = None,
) -> CommutatorDecomposition:
    """Decompose w(x1..xn, z) into a base plus commutator-word components.

    Construction: for each nonempty subset S of {1..n} in (size, lex) order,
    d_S substitutes z for the variables outside S and
    c_S = m(d_S, partial_sum(S), z) subtracts everything already accounted
    for. Every component is checked to be absorbing and the right-associated
    reconstruction is checked against w; a failure raises VerificationError
    naming the offending subset.
    """
    if nvars < 0:
        raise ValueError("nvars must be >= 0")
    z = Var(nvars)
    used = term_vars(w)
    if any(i > nvars for i in used):
        raise ValueError(
            f"term uses variable index {max(used)} beyond x{nvars} and z"
        )
    if maltsev is None:
        result = find_maltsev(alg)
        if result.witness is None:
            raise ValueError(f"{alg.name} has no Mal'tsev term")
        maltsev = result.witness.term

    def m_of(u: Term, v: Term, wterm: Term) -> Term:
        return substitute(maltsev, {0: u, 1: v, 2: wterm})

    def plus(u: Term, v: Term) -> Term:
        return m_of(u, z, v)

    def minus(u: Term, v: Term) -> Term:
        return m_of(u, v, z)

    def right_sum(items: list[Term]) -> Term:
        out = items[-1]
        for item in reversed(items[:-1]):
            out = plus(item, out)
        return out

    base = substitute(w, {i: z for i in range(nvars)})
    subsets = sorted(
        (
            tuple(sorted(c))
            for r in range(1, nvars + 1)
            for c in combinations(range(nvars), r)
        ),
        key=lambda t: (len(t), t),
    )
    comps: dict[tuple[int, ...], Term] = {}
    for subset in subsets:
        d_s = substitute(w, {i: z for i in range(nvars) if i not in subset})
        prior = [base] + [
            comps[t] for t in subsets if t in comps and set(t) < set(subset)
        ]
        comps[subset] = minus(d_s, right_sum(prior))
    components = tuple((s, comps[s]) for s in subsets)

    total = alg.size ** (nvars + 1)
    coord = [
        (np.arange(total) // alg.size ** (nvars - c)) % alg.size
        for c in range(nvars + 1)
    ]
    z_comp = coord[nvars]
    for subset, term in components:
        tbl = term_table(alg, term, nvars + 1)
        for i in subset:
            mask = coord[i] == z_comp
            if not bool((tbl[mask] == z_comp[mask]).all()):
                raise VerificationError(
                    f"component for subset {tuple(i + 1 for i in subset)} "
                    f"is not absorbing in x{i + 1}"
                )
    reconstruction = right_sum([base] + [comps[s] for s in subsets])
    w_tbl = term_table(alg, w, nvars + 1)
    r_tbl = term_table(alg, reconstruction, nvars + 1)
    if not bool(np.array_equal(w_tbl, r_tbl)):
        raise VerificationError("reconstruction is not identity-equal to the input")
    return CommutatorDecomposition(
        algebra=alg,
        input_term=w,
        nvars=nvars,
        base=base,
        components=components,
        reconstruction=reconstruction,
    )


# ---------------------------------------------------------------------------
# Definable principal subcongruences, end to end.


@dataclass(frozen=True)
class DpscInstance:
    algebra_name: str
    a: int
    b: int
    c: int | None
    d: int | None
    witness: UnaryPolynomialWitness | None
    phi_sound: bool
    phi_complete: bool
    error: str | None

    @property
    def ok(self) -> bool:
        return self.error is None and self.phi_sound and self.phi_complete

    def to_json(self, alg: FiniteAlgebra | None = None) -> dict:
        doc = {
            "algebra": self.algebra_name,
            "pair": [self.a, self.b],
            "critical_pair": None if self.c is None else [self.c, self.d],
            "phi_sound": self.phi_sound,
            "phi_complete": self.phi_complete,
            "ok": self.ok,
        }
        if self.error is not None:
            doc["error"] = self.error
        if self.witness is not None and alg is not None:
            doc["witness"] = self.witness.to_json(alg)
        return doc


@dataclass(frozen=True)
class DpscReport:
    base_name: str
    n_bound: int
    instances: tuple[DpscInstance, ...]
    warning: str | None = None

    @property
    def passed(self) -> bool:
        return all(inst.ok for inst in self.instances)

    @property
    def max_witness_complexity(self) -> int:
        return max(
            (inst.witness.complexity for inst in self.instances if inst.witness),
            default=0,
        )

    def to_json(self, algebras: dict[str, FiniteAlgebra] | None = None) -> dict:
        return {
            "base": self.base_name,
            "n_bound": self.n_bound,
            "pass": self.passed,
            "max_witness_complexity": self.max_witness_complexity,
            "instances": [
                inst.to_json((algebras or {}).get(inst.algebra_name))
                for inst in self.instances
            ],
            "warning": self.warning,
        }


def verify_dpsc(
    alg: FiniteAlgebra,
    catalog: Iterable,
    cfg: PsiConfig | None = None,
    budget: int | None = None,
) -> DpscReport:
    """Check definable principal subcongruences over an SI catalog.

    For every catalog member S and every pair a != b: psi_search finds a
    critical pair with a complexity-bounded witness, then Phi must define the
    principal congruence it generates (soundness and completeness both
    required: the monolith of a nilpotent SI algebra is central).
    """
    if cfg is None:
        cfg = default_psi_config(alg, budget=budget)
    phi = build_phi(alg, budget)
    members = [getattr(entry, "algebra", entry) for entry in catalog]
    instances: list[DpscInstance] = []
    for s in members:
        for a in range(s.size):
            for b in range(s.size):
                if a == b:
                    continue
                try:
                    c, d, witness = psi_search(s, a, b, cfg, budget)
                except PsiSearchFailure as e:
                    instances.append(
                        DpscInstance(s.name, a, b, None, None, None, False, False, str(e))
                    )
                    continue
                verdict = phi_defines_check(phi, s, c, d)
                instances.append(
                    DpscInstance(
                        s.name,
                        a,
                        b,
                        c,
                        d,
                        witness,
                        verdict.sound,
                        verdict.complete,
                        None,
                    )
                )
    warning = "empty catalog: vacuous pass" if not members else None
    return DpscReport(alg.name, cfg.n_bound, tuple(instances), warning)


# ---------------------------------------------------------------------------
# The Theta sentence.


@dataclass(frozen=True)
class FirstOrderRendering:
    text: str
    phi_disjuncts: int
    sigma_placeholder: bool = True


def render_theta(phi: PhiFormula, cfg: PsiConfig) -> FirstOrderRendering:
    """Render Theta with Phi expanded and Psi as a named schema.

    The finite equational base Sigma is intentionally a placeholder; its
    construction is out of scope.
    """
    sig = phi.base.signature
    lines = [
        "Sigma: [placeholder -- finite equational base of the variety, not constructed]",
        "",
        "EXISTS u,v [ u != v  AND",
        "  FORALL z,w ( z != w  ->  EXISTS x,y ( Phi(u,v,x,y) AND Psi(x,y,z,w) ) ) ]",
        "",
        f"Phi(u,v,x,y) :=   -- {len(phi.terms)} disjuncts, m = "
        f"{render_term(phi.maltsev, sig, ['u', 'v', 'y'])}",
    ]
    for t in phi.terms:
        t_xy = render_term(t, sig, ["x", "y"])
        t_yy = render_term(t, sig, ["y", "y"])
        m_uvy = render_term(phi.maltsev, sig, ["u", "v", "y"])
        lines.append(f"  OR ( {t_xy} = {m_uvy}  AND  {t_yy} = y )")
    n = cfg.n_bound
    lines += [
        "",
        f"Psi(u,v,x,y) :=   -- schema; N = {n}",
        f"  EXISTS z1..z{n} OR over t in T' ( t(x, z1..z{n}) = u  AND  "
        f"t(y, z1..z{n}) = v )",
        f"  [T' = term representatives on {n + 1} variables, evaluated by "
        "bounded witness search]",
    ]
    return FirstOrderRendering("\n".join(lines), len(phi.terms))


def theta_semantic_check(
    s: FiniteAlgebra,
    phi: PhiFormula,
    cfg: PsiConfig,
    budget: int | None = None,
) -> bool | None:
    """Evaluate the non-Sigma part of Theta on s by quantifier enumeration.

    Psi(x,y,z,w) is evaluated as reachability of (x,y) from (z,w) in the
    pair graph within complexity N (extensionally the defined relation).
    Returns None (unknown) only when a bounded search blows its budget.
    """
    _check_signature(phi, s)
    n = s.size
    if n < 2:
        return False
    try:
        reach: dict[tuple[int, int], frozenset[tuple[int, int]]] = {}
        for z in range(n):
            for w in range(n):
                if z != w:
                    reach[(z, w)] = frozenset(
                        reachable_pairs(s, (z, w), cfg.n_bound, budget)
                    )
        phi_sets = {
            (x, y): phi_relation(phi, s, x, y) for x in range(n) for y in range(n)
        }
    except BudgetError:
        return None
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if all(
                any((u, v) in phi_sets[xy] for xy in reach[(z, w)])
                for z in range(n)
                for w in range(n)
                if z != w
            ):
                return True
    return False
