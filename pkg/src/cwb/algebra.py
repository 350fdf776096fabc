"""Finite algebras as operation tables, JSON I/O, and the basic constructions.

Elements are dense integers 0..n-1. Every tuple encoding in the package uses
the single row-major rank: tuple (a0..a_{r-1}) over a size-n universe sits at
index sum(a_i * n^(r-1-i)). Tables, powers, and subpower index sets therefore
agree bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DEFAULT_BUDGET, AlgebraFormatError, BudgetError
from .partition import Partition

Signature = tuple[tuple[str, int], ...]


def rank_tuple(values: Sequence[int], n: int) -> int:
    r = 0
    for v in values:
        r = r * n + v
    return r


def unrank_tuple(rank: int, n: int, length: int) -> tuple[int, ...]:
    out = [0] * length
    for i in range(length - 1, -1, -1):
        rank, out[i] = divmod(rank, n)
    return tuple(out)


@dataclass(frozen=True)
class FiniteAlgebra:
    """Universe {0..size-1} with named finitary operations as flat tables."""

    name: str
    size: int
    signature: Signature
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "signature", tuple((str(n), int(a)) for n, a in self.signature)
        )
        object.__setattr__(
            self, "tables", tuple(tuple(int(x) for x in t) for t in self.tables)
        )
        n = self.size
        if n < 1:
            raise ValueError(f"size must be positive, got {n}")
        if len(self.tables) != len(self.signature):
            raise ValueError("one table per operation required")
        names = [op_name for op_name, _ in self.signature]
        if len(set(names)) != len(names):
            raise ValueError("op names must be unique within a signature")
        for (op_name, arity), table in zip(self.signature, self.tables):
            if arity < 0:
                raise ValueError(f"{op_name}: arity must be >= 0")
            if len(table) != n**arity:
                raise ValueError(
                    f"{op_name}: table length {len(table)} != {n}^{arity}"
                )
            for x in table:
                if not 0 <= x < n:
                    raise ValueError(f"{op_name}: table entry {x} out of range [0, {n})")

    # numpy views are cached per instance; the cache lives in __dict__ and
    # never affects equality or hashing.
    def op_array(self, op_index: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_arrays", {})
        arr = cache.get(op_index)
        if arr is None:
            _, arity = self.signature[op_index]
            arr = np.array(self.tables[op_index], dtype=np.int64).reshape(
                (self.size,) * arity
            )
            arr.setflags(write=False)
            cache[op_index] = arr
        return arr

    def op_index(self, name: str) -> int:
        for i, (op_name, _) in enumerate(self.signature):
            if op_name == name:
                return i
        raise KeyError(f"no operation named {name!r}")

    def arity(self, op_index: int) -> int:
        return self.signature[op_index][1]

    def apply(self, op_index: int, *args: int) -> int:
        name, arity = self.signature[op_index]
        if len(args) != arity:
            raise ValueError(f"arity mismatch: {name} expects {arity} args")
        return self.tables[op_index][rank_tuple(args, self.size)]

    def elements(self) -> range:
        return range(self.size)

    def rename(self, name: str) -> "FiniteAlgebra":
        return FiniteAlgebra(name, self.size, self.signature, self.tables)

    def __repr__(self) -> str:
        ops = ", ".join(f"{n}/{a}" for n, a in self.signature)
        return f"FiniteAlgebra({self.name!r}, size={self.size}, ops=[{ops}])"


def dumps(alg: FiniteAlgebra) -> str:
    """Serialize to the documented JSON algebra format."""
    doc = {
        "name": alg.name,
        "size": alg.size,
        "operations": [
            {"name": op_name, "arity": arity, "table": list(table)}
            for (op_name, arity), table in zip(alg.signature, alg.tables)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str, source: str = "<string>") -> FiniteAlgebra:
    """Parse the JSON algebra format with field-level diagnostics."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise AlgebraFormatError(f"{source}: invalid JSON at line {e.lineno}: {e.msg}")
    if not isinstance(doc, dict):
        raise AlgebraFormatError(f"{source}: top level must be an object")
    for key in ("name", "size", "operations"):
        if key not in doc:
            raise AlgebraFormatError(f"{source}: missing field {key!r}")
    if not isinstance(doc["name"], str):
        raise AlgebraFormatError(f"{source}: 'name' must be a string")
    if not isinstance(doc["size"], int) or doc["size"] < 1:
        raise AlgebraFormatError(f"{source}: 'size' must be a positive integer")
    if not isinstance(doc["operations"], list):
        raise AlgebraFormatError(f"{source}: 'operations' must be a list")
    signature = []
    tables = []
    for i, op in enumerate(doc["operations"]):
        where = f"{source}: operations[{i}]"
        if not isinstance(op, dict):
            raise AlgebraFormatError(f"{where}: must be an object")
        for key in ("name", "arity", "table"):
            if key not in op:
                raise AlgebraFormatError(f"{where}: missing field {key!r}")
        if not isinstance(op["name"], str):
            raise AlgebraFormatError(f"{where}: 'name' must be a string")
        if not isinstance(op["arity"], int) or op["arity"] < 0:
            raise AlgebraFormatError(f"{where}: 'arity' must be a non-negative integer")
        if not isinstance(op["table"], list) or not all(
            isinstance(x, int) for x in op["table"]
        ):
            raise AlgebraFormatError(f"{where}: 'table' must be a list of integers")
        signature.append((op["name"], op["arity"]))
        tables.append(tuple(op["table"]))
    try:
        return FiniteAlgebra(doc["name"], doc["size"], tuple(signature), tuple(tables))
    except ValueError as e:
        raise AlgebraFormatError(f"{source}: {e}")


def load(path: str | Path) -> FiniteAlgebra:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), source=str(path))


def save(alg: FiniteAlgebra, path: str | Path) -> None:
    Path(path).write_text(dumps(alg), encoding="utf-8")


def power(alg: FiniteAlgebra, k: int, budget: int | None = None) -> FiniteAlgebra:
    """Direct power alg^k with elements rank-encoded as k-tuples."""
    if k < 1:
        raise ValueError("power exponent must be >= 1")
    budget = DEFAULT_BUDGET if budget is None else budget
    n = alg.size
    big = n**k
    if big > budget:
        raise BudgetError(f"power universe {n}^{k} = {big} exceeds budget {budget}")
    # Decode matrix: element p -> its k components.
    comps = np.stack(
        [(np.arange(big) // n ** (k - 1 - c)) % n for c in range(k)], axis=1
    )
    signature = alg.signature
    tables = []
    for op_index, (op_name, arity) in enumerate(signature):
        rows = big**arity
        if rows > budget:
            raise BudgetError(
                f"power table for {op_name} has {big}^{arity} = {rows} entries, "
                f"over budget {budget}"
            )
        table_nd = alg.op_array(op_index)
        if arity == 0:
            value = int(rank_tuple([int(table_nd[()])] * k, n))
            tables.append((value,))
            continue
        grids = np.meshgrid(*([np.arange(big)] * arity), indexing="ij")
        flat_args = [g.reshape(-1) for g in grids]
        out = np.zeros(rows, dtype=np.int64)
        for c in range(k):
            comp_args = tuple(comps[a, c] for a in flat_args)
            out = out * n + table_nd[comp_args]
        tables.append(tuple(int(x) for x in out))
    return FiniteAlgebra(f"{alg.name}^{k}", big, signature, tuple(tables))


def subuniverse_closure(
    alg: FiniteAlgebra, seed: Iterable[int], budget: int | None = None
) -> frozenset[int]:
    """Least subset containing seed, all nullary-op values, and closed under ops."""
    budget = DEFAULT_BUDGET if budget is None else budget
    members: set[int] = set()
    frontier: list[int] = []

    def add(x: int) -> None:
        if x not in members:
            members.add(x)
            frontier.append(x)

    for x in seed:
        if not 0 <= x < alg.size:
            raise ValueError(f"seed element {x} out of range")
        add(x)
    for op_index, (_, arity) in enumerate(alg.signature):
        if arity == 0:
            add(alg.tables[op_index][0])
    from itertools import product

    while frontier:
        batch, frontier = frontier, []
        known = sorted(members)
        for op_index, (_, arity) in enumerate(alg.signature):
            if arity == 0:
                continue
            table = alg.tables[op_index]
            n = alg.size
            for x in batch:
                # Every argument tuple that touches the new element at least
                # once; tuples over older elements were handled earlier.
                for pos in range(arity):
                    for rest in product(known, repeat=arity - 1):
                        args = rest[:pos] + (x,) + rest[pos:]
                        add(table[rank_tuple(args, n)])
        if len(members) > budget:
            raise BudgetError(f"subuniverse closure exceeded budget {budget}")
    return frozenset(members)


def restrict(
    alg: FiniteAlgebra, universe: Iterable[int], name: str | None = None
) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    """Subalgebra on a closed subset, elements renumbered by sorted order.

    Returns (subalgebra, carrier) where carrier[i] is the element of alg that
    i represents.
    """
    carrier = tuple(sorted(set(universe)))
    index = {x: i for i, x in enumerate(carrier)}
    m = len(carrier)
    from itertools import product

    tables = []
    for op_index, (op_name, arity) in enumerate(alg.signature):
        table = []
        for args in product(carrier, repeat=arity):
            value = alg.apply(op_index, *args)
            if value not in index:
                raise ValueError(f"universe not closed under {op_name}")
            table.append(index[value])
        tables.append(tuple(table))
    sub = FiniteAlgebra(
        name if name is not None else f"{alg.name}|{m}", m, alg.signature, tuple(tables)
    )
    return sub, carrier


def is_compatible(alg: FiniteAlgebra, part: Partition) -> bool:
    """True iff the partition respects every operation (congruence test).

    Single-coordinate substitution suffices: full compatibility follows by
    chaining substitutions through transitivity.
    """
    if part.n != alg.size:
        raise ValueError(f"partition over {part.n} elements, algebra has {alg.size}")
    from itertools import product

    n = alg.size
    blocks = {r: part.block_of(r) for r in set(part.ids)}
    for op_index, (_, arity) in enumerate(alg.signature):
        table = alg.tables[op_index]
        for args in product(range(n), repeat=arity):
            base = table[rank_tuple(args, n)]
            for pos in range(arity):
                a = args[pos]
                for b in blocks[part.ids[a]]:
                    if b <= a:
                        continue
                    swapped = args[:pos] + (b,) + args[pos + 1 :]
                    if not part.related(base, table[rank_tuple(swapped, n)]):
                        return False
    return True


def quotient(
    alg: FiniteAlgebra, theta: Partition, name: str | None = None
) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    """Quotient algebra alg/theta plus the block map.

    Blocks are numbered by least element in increasing order. Raises
    ValueError when theta is not a congruence.
    """
    if not is_compatible(alg, theta):
        raise ValueError("quotient requires a congruence partition")
    roots = sorted(set(theta.ids))
    block_index = {r: i for i, r in enumerate(roots)}
    block_map = tuple(block_index[r] for r in theta.ids)
    m = len(roots)
    from itertools import product

    tables = []
    for op_index, (_, arity) in enumerate(alg.signature):
        table = []
        for args in product(roots, repeat=arity):
            table.append(block_map[alg.apply(op_index, *args)])
        tables.append(tuple(table))
    quot = FiniteAlgebra(
        name if name is not None else f"{alg.name}/q{m}", m, alg.signature, tuple(tables)
    )
    return quot, block_map
