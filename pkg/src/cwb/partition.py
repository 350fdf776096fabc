"""Partitions of {0..n-1} in canonical least-element form.

The block id of an element is the least element of its block, so equality of
partitions is structural and partitions hash cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Partition:
    ids: tuple[int, ...]

    def __post_init__(self) -> None:
        ids = tuple(int(i) for i in self.ids)
        object.__setattr__(self, "ids", ids)
        for i, b in enumerate(ids):
            if not (0 <= b <= i) or ids[b] != b:
                raise ValueError(f"ids not in canonical least-element form at {i}")

    @staticmethod
    def zero(n: int) -> "Partition":
        """All singletons (the identity relation 0_A)."""
        return Partition(tuple(range(n)))

    @staticmethod
    def one(n: int) -> "Partition":
        """A single block (the full relation 1_A)."""
        return Partition((0,) * n) if n else Partition(())

    @staticmethod
    def from_root_map(roots: Iterable[int]) -> "Partition":
        """Canonicalize any map element -> representative of its class."""
        roots = list(roots)
        least: dict[int, int] = {}
        for i, r in enumerate(roots):
            if r not in least:
                least[r] = i
        return Partition(tuple(least[r] for r in roots))

    @staticmethod
    def from_keys(keys: Iterable) -> "Partition":
        """Group elements sharing a key; blocks named by least element."""
        keys = list(keys)
        least: dict = {}
        for i, k in enumerate(keys):
            least.setdefault(k, i)
        return Partition(tuple(least[k] for k in keys))

    @staticmethod
    def from_blocks(n: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        roots = [-1] * n
        for block in blocks:
            block = sorted(block)
            for x in block:
                if not 0 <= x < n or roots[x] != -1:
                    raise ValueError(f"blocks must partition 0..{n - 1}")
                roots[x] = block[0]
        if any(r == -1 for r in roots):
            raise ValueError("blocks must cover the universe")
        return Partition(tuple(roots))

    @staticmethod
    def from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> "Partition":
        """Equivalence closure of the given pairs (union-find)."""
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in pairs:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return Partition.from_root_map(find(x) for x in range(n))

    @property
    def n(self) -> int:
        return len(self.ids)

    def related(self, a: int, b: int) -> bool:
        return self.ids[a] == self.ids[b]

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Blocks as sorted tuples, ordered by least element."""
        by_root: dict[int, list[int]] = {}
        for i, r in enumerate(self.ids):
            by_root.setdefault(r, []).append(i)
        return tuple(tuple(by_root[r]) for r in sorted(by_root))

    def block_of(self, a: int) -> tuple[int, ...]:
        root = self.ids[a]
        return tuple(i for i, r in enumerate(self.ids) if r == root)

    def num_blocks(self) -> int:
        return len(set(self.ids))

    def pairs(self) -> Iterator[tuple[int, int]]:
        """All ordered related pairs, including the diagonal."""
        for block in self.blocks():
            for a in block:
                for b in block:
                    yield (a, b)

    def is_zero(self) -> bool:
        return all(r == i for i, r in enumerate(self.ids))

    def is_one(self) -> bool:
        return all(r == 0 for r in self.ids)

    def refines(self, other: "Partition") -> bool:
        """True iff self <= other (every block of self inside a block of other)."""
        self._check_size(other)
        return all(other.ids[i] == other.ids[r] for i, r in enumerate(self.ids))

    def meet(self, other: "Partition") -> "Partition":
        self._check_size(other)
        least: dict[tuple[int, int], int] = {}
        roots = []
        for i, key in enumerate(zip(self.ids, other.ids)):
            roots.append(least.setdefault(key, i))
        return Partition(tuple(roots))

    def join(self, other: "Partition") -> "Partition":
        """Partition join: transitive closure of the union of the relations."""
        self._check_size(other)
        return Partition.from_pairs(
            self.n, [(i, r) for i, r in enumerate(self.ids)] + [(i, r) for i, r in enumerate(other.ids)]
        )

    def compose(self, other: "Partition") -> frozenset[tuple[int, int]]:
        """Relation composition self o other as a set of ordered pairs."""
        self._check_size(other)
        out: set[tuple[int, int]] = set()
        for a in range(self.n):
            for c in self.block_of(a):
                root = other.ids[c]
                out.update((a, b) for b in range(self.n) if other.ids[b] == root)
        return frozenset(out)

    def sort_key(self) -> tuple:
        """Deterministic lattice order: finer first, then by the id array."""
        return (-self.num_blocks(), self.ids)

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks()]

    def _check_size(self, other: "Partition") -> None:
        if self.n != other.n:
            raise ValueError(f"universe size mismatch: {self.n} vs {other.n}")

    def __repr__(self) -> str:
        inner = "|".join(",".join(str(x) for x in b) for b in self.blocks())
        return f"Partition[{inner}]"
