"""Desk-scale HSP enumeration of subdirectly irreducible members of V(A).

Quotients of small-generated subalgebras of small powers of A, filtered by
si_check, deduplicated up to isomorphism by backtracking with element
invariants. The caps (power, generator count, size) are honest parameters,
not certified bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, product
from pathlib import Path

from .algebra import FiniteAlgebra, dumps, power, quotient, restrict, subuniverse_closure
from .centrality import nilpotence_class
from .congruence import SIWitness, congruence_lattice, si_check
from .errors import DEFAULT_BUDGET
from .partition import Partition


def _profiles(alg: FiniteAlgebra) -> list[tuple]:
    """Isomorphism-invariant fingerprint per element, used to prune."""
    n = alg.size
    out = []
    for x in range(n):
        profile = []
        for op_index, (_, arity) in enumerate(alg.signature):
            table = alg.tables[op_index]
            if arity == 0:
                profile.append(("const", table[0] == x))
            elif arity == 1:
                seen = [x]
                cur = x
                while True:
                    cur = table[cur]
                    if cur in seen:
                        break
                    seen.append(cur)
                profile.append(("orbit", len(seen), table[x] == x))
            else:
                hits = 0
                for args in product(range(n), repeat=arity):
                    if alg.apply(op_index, *args) == x:
                        hits += 1
                diag = alg.apply(op_index, *([x] * arity)) == x
                fixed_left = sum(
                    1 for y in range(n) if alg.apply(op_index, *([x] + [y] * (arity - 1))) == y
                )
                profile.append(("count", hits, diag, fixed_left))
        out.append(tuple(profile))
    return out


def is_isomorphic(s1: FiniteAlgebra, s2: FiniteAlgebra) -> bool:
    """Backtracking search for a table-preserving bijection."""
    if s1.signature != s2.signature or s1.size != s2.size:
        return False
    n = s1.size
    prof1 = _profiles(s1)
    prof2 = _profiles(s2)
    if sorted(prof1) != sorted(prof2):
        return False
    candidates = [
        [y for y in range(n) if prof2[y] == prof1[x]] for x in range(n)
    ]
    mapping = [-1] * n
    used = [False] * n

    def consistent(upto: int) -> bool:
        assigned = list(range(upto + 1))
        for op_index, (_, arity) in enumerate(s1.signature):
            if arity == 0:
                a = s1.tables[op_index][0]
                b = s2.tables[op_index][0]
                if a <= upto and mapping[a] != b:
                    return False
                continue
            for args in product(assigned, repeat=arity):
                value = s1.apply(op_index, *args)
                if value > upto:
                    continue
                # Check a constraint exactly once: when its last element lands.
                if upto not in args and value != upto:
                    continue
                if s2.apply(op_index, *(mapping[a] for a in args)) != mapping[value]:
                    return False
        return True

    def search(x: int) -> bool:
        if x == n:
            return True
        for y in candidates[x]:
            if used[y]:
                continue
            mapping[x] = y
            used[y] = True
            if consistent(x) and search(x + 1):
                return True
            used[y] = False
            mapping[x] = -1
        return False

    return search(0)


@dataclass(frozen=True)
class CatalogEntry:
    """SI member of V(A) with the provenance that rebuilds it."""

    algebra: FiniteAlgebra
    power_exponent: int
    generators: tuple[int, ...]
    subuniverse: tuple[int, ...]
    quotient_congruence: Partition
    si: SIWitness
    nilpotence_class: int | None

    def replay(self, base: FiniteAlgebra, budget: int | None = None) -> FiniteAlgebra:
        """Rebuild the algebra from provenance (up to isomorphism)."""
        p = power(base, self.power_exponent, budget)
        sub, _ = restrict(p, self.subuniverse)
        quot, _ = quotient(sub, self.quotient_congruence)
        return quot

    def to_json(self) -> dict:
        return {
            "name": self.algebra.name,
            "size": self.algebra.size,
            "power_exponent": self.power_exponent,
            "generators": list(self.generators),
            "subuniverse": list(self.subuniverse),
            "quotient_congruence": self.quotient_congruence.to_json(),
            "monolith": self.si.monolith.to_json(),
            "nilpotence_class": self.nilpotence_class,
        }


def enumerate_si(
    alg: FiniteAlgebra,
    max_power: int = 2,
    max_size: int = 8,
    budget: int | None = None,
    max_generators: int = 2,
) -> tuple[CatalogEntry, ...]:
    """SI members of V(A) found through quotients of subalgebras of A^k."""
    if max_power < 1:
        raise ValueError("max_power must be >= 1")
    budget = DEFAULT_BUDGET if budget is None else budget
    entries: list[CatalogEntry] = []
    for k in range(1, max_power + 1):
        p = power(alg, k, budget)
        closures: dict[frozenset[int], tuple[int, ...]] = {}
        seeds = [
            seed
            for r in range(1, max_generators + 1)
            for seed in combinations(range(p.size), r)
        ]
        for seed in seeds:
            closure = subuniverse_closure(p, seed, budget)
            closures.setdefault(closure, seed)
        for closure in sorted(closures, key=lambda c: (len(c), sorted(c))):
            seed = closures[closure]
            sub, _ = restrict(p, closure, name=f"{alg.name}^{k}|{len(closure)}")
            for theta in congruence_lattice(sub, budget):
                quot, _ = quotient(sub, theta)
                if quot.size > max_size:
                    continue
                witness = si_check(quot)
                if witness is None:
                    continue
                if any(
                    e.algebra.size == quot.size and is_isomorphic(e.algebra, quot)
                    for e in entries
                ):
                    continue
                named = quot.rename(f"{alg.name}-si-{len(entries)}")
                entries.append(
                    CatalogEntry(
                        algebra=named,
                        power_exponent=k,
                        generators=seed,
                        subuniverse=tuple(sorted(closure)),
                        quotient_congruence=theta,
                        si=witness,
                        nilpotence_class=nilpotence_class(quot),
                    )
                )
    entries.sort(key=lambda e: (e.algebra.size, e.algebra.tables))
    renamed = []
    for i, e in enumerate(entries):
        renamed.append(
            CatalogEntry(
                algebra=e.algebra.rename(f"{alg.name}-si-{i}"),
                power_exponent=e.power_exponent,
                generators=e.generators,
                subuniverse=e.subuniverse,
                quotient_congruence=e.quotient_congruence,
                si=e.si,
                nilpotence_class=e.nilpotence_class,
            )
        )
    return tuple(renamed)


def write_manifest(
    base: FiniteAlgebra, entries: tuple[CatalogEntry, ...], directory: str | Path
) -> Path:
    """Emit entry algebra files plus a manifest.json referencing them."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"base": base.name, "entries": []}
    for i, entry in enumerate(entries):
        filename = f"{entry.algebra.name}.json"
        (directory / filename).write_text(dumps(entry.algebra), encoding="utf-8")
        doc = entry.to_json()
        doc["file"] = filename
        manifest["entries"].append(doc)
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    return path
