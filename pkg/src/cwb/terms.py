"""Term syntax trees over a finite signature, evaluation, and identity checks.

Variables are numbered from 0. Display names default to x1, x2, ... but every
renderer/parser accepts an explicit name list (the absorbing-word and
decomposition code names its last variable z).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterator, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .algebra import FiniteAlgebra


class Term:
    """Base class for Var and App nodes. Immutable; subtrees may be shared."""

    __slots__ = ()

    size: int
    depth: int


@dataclass(frozen=True)
class Var(Term):
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"variable index must be >= 0, got {self.index}")

    @property
    def size(self) -> int:
        return 1

    @property
    def depth(self) -> int:
        return 0


class App(Term):
    """Application of the op at `op` (an index into the signature) to args."""

    __slots__ = ("op", "args", "size", "depth", "_hash")

    def __init__(self, op: int, args: Sequence[Term] = ()):
        object.__setattr__(self, "op", int(op))
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "size", 1 + sum(a.size for a in self.args))
        object.__setattr__(
            self, "depth", 1 + max((a.depth for a in self.args), default=0)
        )
        object.__setattr__(self, "_hash", hash((self.op, self.args)))

    def __setattr__(self, name, value):
        raise AttributeError("App is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, App) and self.op == other.op and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.op}, {self.args!r})"


def preorder(term: Term) -> Iterator[tuple[int, int]]:
    """Yield (kind, index) node labels in preorder; kind 0 = Var, 1 = App."""
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield (0, t.index)
        else:
            assert isinstance(t, App)
            yield (1, t.op)
            stack.extend(reversed(t.args))


def term_key(term: Term) -> tuple:
    """Canonical order key: (size, depth, preorder labels)."""
    return (term.size, term.depth, tuple(preorder(term)))


def term_vars(term: Term) -> frozenset[int]:
    """Set of variable indices occurring in the term."""
    seen: set[int] = set()
    done: set[int] = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if id(t) in done:
            continue
        done.add(id(t))
        if isinstance(t, Var):
            seen.add(t.index)
        else:
            stack.extend(t.args)  # type: ignore[union-attr]
    return frozenset(seen)


def validate_term(alg: "FiniteAlgebra", term: Term) -> None:
    """Check op indices and arities against the signature; raise ValueError."""
    done: set[int] = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if id(t) in done or isinstance(t, Var):
            continue
        done.add(id(t))
        assert isinstance(t, App)
        if not 0 <= t.op < len(alg.signature):
            raise ValueError(f"op index {t.op} out of range for signature")
        name, arity = alg.signature[t.op]
        if len(t.args) != arity:
            raise ValueError(
                f"arity mismatch: {name} expects {arity} args, got {len(t.args)}"
            )
        stack.extend(t.args)


def eval_term(alg: "FiniteAlgebra", term: Term, assignment: Mapping[int, int]) -> int:
    """Evaluate term in alg under the assignment (variable index -> element).

    Shared subtrees are evaluated once. Raises ValueError for an unassigned
    variable, an out-of-range element, or an arity mismatch.
    """
    validate_term(alg, term)
    n = alg.size
    memo: dict[int, int] = {}

    def go(t: Term) -> int:
        v = memo.get(id(t))
        if v is not None:
            return v
        if isinstance(t, Var):
            if t.index not in assignment:
                raise ValueError(f"unassigned variable x{t.index + 1}")
            v = assignment[t.index]
            if not 0 <= v < n:
                raise ValueError(f"element {v} out of range [0, {n})")
        else:
            assert isinstance(t, App)
            v = alg.apply(t.op, *(go(a) for a in t.args))
        memo[id(t)] = v
        return v

    return go(term)


def term_table(alg: "FiniteAlgebra", term: Term, nvars: int) -> np.ndarray:
    """Value vector of the term function over all n^nvars assignments.

    Assignment (v0..v_{k-1}) sits at rank sum(v_i * n^(k-1-i)), the same
    row-major convention as operation tables.
    """
    validate_term(alg, term)
    n = alg.size
    total = n**nvars
    memo: dict[int, np.ndarray] = {}

    def go(t: Term) -> np.ndarray:
        arr = memo.get(id(t))
        if arr is not None:
            return arr
        if isinstance(t, Var):
            if t.index >= nvars:
                raise ValueError(
                    f"term uses variable x{t.index + 1} but table has {nvars} variables"
                )
            arr = (np.arange(total) // n ** (nvars - 1 - t.index)) % n
        else:
            assert isinstance(t, App)
            table = alg.op_array(t.op)
            if t.args:
                arr = table[tuple(go(a) for a in t.args)]
            else:
                arr = np.full(total, int(table[()]), dtype=np.int64)
        memo[id(t)] = arr
        return arr

    return go(term)


def identity_holds(alg: "FiniteAlgebra", t1: Term, t2: Term) -> bool:
    """True iff t1 and t2 agree under every assignment into alg's universe."""
    nvars = max(term_vars(t1) | term_vars(t2), default=-1) + 1
    if nvars == 0:
        return eval_term(alg, t1, {}) == eval_term(alg, t2, {})
    return bool(np.array_equal(term_table(alg, t1, nvars), term_table(alg, t2, nvars)))


def substitute(term: Term, mapping: Mapping[int, Term]) -> Term:
    """Replace variables by terms; shared subtrees are rewritten once."""
    memo: dict[int, Term] = {}

    def go(t: Term) -> Term:
        out = memo.get(id(t))
        if out is not None:
            return out
        if isinstance(t, Var):
            out = mapping.get(t.index, t)
        else:
            assert isinstance(t, App)
            new_args = tuple(go(a) for a in t.args)
            out = t if all(n is o for n, o in zip(new_args, t.args)) else App(t.op, new_args)
        memo[id(t)] = out
        return out

    return go(term)


def default_var_names(count: int) -> list[str]:
    return [f"x{i + 1}" for i in range(count)]


def render_term(
    term: Term,
    signature: Sequence[tuple[str, int]],
    var_name: Callable[[int], str] | Sequence[str] | None = None,
) -> str:
    """Prefix-notation string, e.g. mul(x1, inv(x2))."""
    if var_name is None:
        name = lambda i: f"x{i + 1}"
    elif callable(var_name):
        name = var_name
    else:
        names = list(var_name)
        name = lambda i: names[i]

    def go(t: Term) -> str:
        if isinstance(t, Var):
            return name(t.index)
        assert isinstance(t, App)
        op_name = signature[t.op][0]
        if not t.args:
            return op_name
        return f"{op_name}({', '.join(go(a) for a in t.args)})"

    return go(term)


def parse_term(
    text: str,
    signature: Sequence[tuple[str, int]],
    var_names: Mapping[str, int] | None = None,
) -> Term:
    """Parse prefix notation with op names from the signature.

    Default variable tokens are x1, x2, ... (mapping to indices 0, 1, ...)
    plus z, which maps to the index right after the largest x present. Pass
    var_names to override. Nullary ops may be written with or without ().
    """
    import re

    tokens = re.findall(r"[A-Za-z_][A-Za-z0-9_]*|[(),]", text)
    if "".join(tokens).replace(" ", "") != re.sub(r"\s+", "", text):
        raise ValueError(f"unrecognized characters in term: {text!r}")
    ops = {name: (i, arity) for i, (name, arity) in enumerate(signature)}
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of term: {text!r}")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r} but found {tok!r} in {text!r}")
        pos += 1
        return tok

    # Without an explicit mapping, z resolves after the whole term is read.
    z_marker = object()

    def parse_node():
        tok = take()
        if tok in ("(", ")", ","):
            raise ValueError(f"unexpected {tok!r} in {text!r}")
        if tok in ops:
            op_index, arity = ops[tok]
            args = []
            if peek() == "(":
                take("(")
                if peek() != ")":
                    args.append(parse_node())
                    while peek() == ",":
                        take(",")
                        args.append(parse_node())
                take(")")
            if len(args) != arity:
                raise ValueError(f"{tok} expects {arity} args, got {len(args)}")
            return ("app", op_index, args)
        if var_names is not None:
            if tok not in var_names:
                raise ValueError(f"unknown variable {tok!r}")
            return ("var", var_names[tok])
        if tok == "z":
            return ("var", z_marker)
        m = re.fullmatch(r"x([1-9][0-9]*)", tok)
        if not m:
            raise ValueError(f"unknown token {tok!r} (variables are x1, x2, ..., z)")
        return ("var", int(m.group(1)) - 1)

    tree = parse_node()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens after term: {text!r}")

    max_x = -1

    def scan(node) -> None:
        nonlocal max_x
        if node[0] == "var":
            if node[1] is not z_marker:
                max_x = max(max_x, node[1])
        else:
            for a in node[2]:
                scan(a)

    scan(tree)
    z_index = max_x + 1

    def build(node) -> Term:
        if node[0] == "var":
            idx = z_index if node[1] is z_marker else node[1]
            return Var(idx)
        return App(node[1], [build(a) for a in node[2]])

    return build(tree)


def term_stream(
    signature: Sequence[tuple[str, int]],
    nvars: int,
    max_size: int,
    max_depth: int | None = None,
) -> Iterator[Term]:
    """Yield all terms over nvars variables up to max_size, in canonical order.

    Lazy by size level; used for bounded diagnostic searches where a full
    free-algebra catalog would be astronomically large.
    """
    from itertools import product

    by_size: list[list[Term]] = [[]]
    level: list[Term] = [Var(i) for i in range(nvars)]
    level += [App(i) for i, (_, arity) in enumerate(signature) if arity == 0]
    level.sort(key=term_key)
    by_size.append(level)
    yield from level
    for size in range(2, max_size + 1):
        level = []
        for op_index, (_, arity) in enumerate(signature):
            if arity == 0:
                continue
            # Children sizes must sum to size - 1.
            for split in _compositions(size - 1, arity):
                if any(s >= len(by_size) for s in split):
                    continue
                for args in product(*(by_size[s] for s in split)):
                    t = App(op_index, args)
                    if max_depth is None or t.depth <= max_depth:
                        level.append(t)
        level.sort(key=term_key)
        by_size.append(level)
        yield from level


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of `parts` positive integers summing to total."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
