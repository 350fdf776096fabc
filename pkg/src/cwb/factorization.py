"""Direct factorization into directly indecomposable factors.

Splits greedily on factor-congruence pairs (alpha, beta) with
alpha ^ beta = 0, alpha v beta = 1 and alpha o beta = beta o alpha, recursing
on the two quotients. The assembled isomorphism onto the direct product is
verified exhaustively before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .algebra import FiniteAlgebra, quotient
from .congruence import congruence_lattice, permute_check
from .errors import VerificationError
from .partition import Partition


def is_prime_power(m: int) -> bool:
    """True iff m = p^e for a prime p (1 counts, as the empty power)."""
    if m < 1:
        return False
    if m == 1:
        return True
    d = 2
    while d * d <= m and m % d != 0:
        d += 1
    if d * d > m:
        return True
    while m % d == 0:
        m //= d
    return m == 1


@dataclass(frozen=True)
class Factorization:
    """Factors with their projection kernels and the assembled isomorphism.

    iso[a] is the rank of (h_0(a), ..., h_{m-1}(a)) in the mixed-radix order
    of the factor sizes; kernels[i] is the kernel of h_i as a partition of
    the original algebra.
    """

    algebra: FiniteAlgebra
    factors: tuple[FiniteAlgebra, ...]
    kernels: tuple[Partition, ...]
    iso: tuple[int, ...]
    prime_power: tuple[bool, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    @property
    def all_prime_power(self) -> bool:
        return all(self.prime_power)

    def to_json(self) -> dict:
        return {
            "factors": [
                {"name": f.name, "size": f.size, "prime_power": pp}
                for f, pp in zip(self.factors, self.prime_power)
            ],
            "sizes": list(self.sizes),
            "all_prime_power": self.all_prime_power,
            "iso": list(self.iso),
        }


def _split(
    alg: FiniteAlgebra, budget: int | None
) -> list[tuple[FiniteAlgebra, tuple[int, ...]]]:
    """Recursive factor search; returns (factor, projection map) pairs."""
    lattice = congruence_lattice(alg, budget)
    proper = [p for p in lattice if not p.is_zero() and not p.is_one()]
    one = Partition.one(alg.size)
    for alpha in proper:
        for beta in proper:
            if alpha is beta:
                continue
            if not alpha.meet(beta).is_zero():
                continue
            if alpha.join(beta) != one:
                continue
            if not permute_check(alg, alpha, beta):
                continue
            qa, map_a = quotient(alg, alpha, name=f"{alg.name}.L")
            qb, map_b = quotient(alg, beta, name=f"{alg.name}.R")
            out = []
            for factor, proj in _split(qa, budget):
                out.append((factor, tuple(proj[map_a[x]] for x in range(alg.size))))
            for factor, proj in _split(qb, budget):
                out.append((factor, tuple(proj[map_b[x]] for x in range(alg.size))))
            return out
    return [(alg, tuple(range(alg.size)))]


def direct_factorization(
    alg: FiniteAlgebra, budget: int | None = None
) -> Factorization:
    """Decompose alg into directly indecomposable factors and verify the iso."""
    parts = _split(alg, budget)
    factors = tuple(f for f, _ in parts)
    projections = tuple(proj for _, proj in parts)
    sizes = [f.size for f in factors]
    n = alg.size
    total = 1
    for s in sizes:
        total *= s
    if total != n:
        raise VerificationError(
            f"factor sizes {sizes} do not multiply to {n}"
        )
    iso = []
    for a in range(n):
        r = 0
        for proj, s in zip(projections, sizes):
            r = r * s + proj[a]
        iso.append(r)
    if len(set(iso)) != n:
        raise VerificationError("assembled factor map is not a bijection")
    for op_index, (op_name, arity) in enumerate(alg.signature):
        for factor, proj in parts:
            for args in product(range(n), repeat=arity):
                value = proj[alg.apply(op_index, *args)]
                mapped = factor.apply(op_index, *(proj[x] for x in args))
                if value != mapped:
                    raise VerificationError(
                        f"projection to {factor.name} does not preserve {op_name}"
                    )
    kernels = tuple(Partition.from_keys(proj) for proj in projections)
    # Factor-congruence pairing: each kernel against the meet of the others.
    one = Partition.one(n)
    for i, alpha in enumerate(kernels):
        beta = one
        for j, other in enumerate(kernels):
            if j != i:
                beta = beta.meet(other)
        if not alpha.meet(beta).is_zero():
            raise VerificationError("factor kernels fail alpha ^ beta = 0")
        if len(kernels) > 1 and alpha.join(beta) != one:
            raise VerificationError("factor kernels fail alpha v beta = 1")
        if not permute_check(alg, alpha, beta):
            raise VerificationError("factor kernels fail permutability")
    return Factorization(
        algebra=alg,
        factors=factors,
        kernels=kernels,
        iso=tuple(iso),
        prime_power=tuple(is_prime_power(s) for s in sizes),
    )
