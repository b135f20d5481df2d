"""Abstract syntax of FOC1 formulas and counting terms.

Nodes are immutable and carry their free-variable set and size. Size is a
token count of the fully parenthesised rendering where every variable,
integer, relation name and punctuation symbol counts as one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

VAR_RE = re.compile(r"^[a-z][a-zA-Z0-9_]*$")
REL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
KEYWORDS = frozenset({"exists", "forall", "true", "false", "dist"})


class SyntaxRuleError(ValueError):
    """A side condition of the term/formula formation rules is violated."""


class IllTypedError(TypeError):
    pass


def _check_var(v: str) -> str:
    if not isinstance(v, str) or not VAR_RE.match(v) or v in KEYWORDS:
        raise SyntaxRuleError(f"invalid variable name {v!r}")
    return v


@dataclass(frozen=True)
class Expr:
    free: frozenset = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)

    is_formula = False
    is_term = False

    def _set(self, free, size):
        object.__setattr__(self, "free", frozenset(free))
        object.__setattr__(self, "size", size)

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self) -> str:
        from .parser import to_text

        return to_text(self)


# -- formulas ---------------------------------------------------------------

@dataclass(frozen=True)
class Eq(Expr):
    a: str
    b: str
    is_formula = True

    def __post_init__(self):
        self._set({_check_var(self.a), _check_var(self.b)}, 3)


@dataclass(frozen=True)
class Atom(Expr):
    rel: str
    args: tuple[str, ...]
    is_formula = True

    def __post_init__(self):
        if not REL_RE.match(self.rel) or self.rel in KEYWORDS:
            raise SyntaxRuleError(f"invalid relation name {self.rel!r}")
        object.__setattr__(self, "args", tuple(self.args))
        for v in self.args:
            _check_var(v)
        k = len(self.args)
        self._set(self.args, 3 if k == 0 else 2 * k + 2)


@dataclass(frozen=True)
class Not(Expr):
    sub: Expr
    is_formula = True

    def __post_init__(self):
        self._set(self.sub.free, 1 + self.sub.size)

    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr
    is_formula = True

    def __post_init__(self):
        self._set(self.left.free | self.right.free, 3 + self.left.size + self.right.size)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Exists(Expr):
    var: str
    body: Expr
    is_formula = True

    def __post_init__(self):
        _check_var(self.var)
        self._set(self.body.free - {self.var}, 2 + self.body.size)

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class NumPred(Expr):
    name: str
    args: tuple[Expr, ...]
    is_formula = True

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise SyntaxRuleError("numerical predicate needs at least one argument")
        free = frozenset().union(*(t.free for t in self.args))
        if len(free) > 1:
            raise SyntaxRuleError(
                f"arguments of {self.name} have free variables {sorted(free)}; at most one allowed"
            )
        m = len(self.args)
        self._set(free, 3 + (m - 1) + sum(t.size for t in self.args))

    def children(self):
        return self.args


@dataclass(frozen=True)
class Truth(Expr):
    """Constant true/false (a derived formula kept as a node)."""

    value: bool
    is_formula = True

    def __post_init__(self):
        self._set((), 1)


@dataclass(frozen=True)
class Dist(Expr):
    """dist(a, b) <= radius, a derived first-order formula over the Gaifman graph."""

    a: str
    b: str
    radius: int
    is_formula = True

    def __post_init__(self):
        if int(self.radius) < 0:
            raise SyntaxRuleError("distance radius must be non-negative")
        object.__setattr__(self, "radius", int(self.radius))
        self._set({_check_var(self.a), _check_var(self.b)}, 8)


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True)
class Count(Expr):
    vars: tuple[str, ...]
    body: Expr
    is_term = True

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        for v in self.vars:
            _check_var(v)
        if len(set(self.vars)) != len(self.vars):
            raise SyntaxRuleError(f"repeated bound variable in count over {list(self.vars)}")
        k = len(self.vars)
        self._set(self.body.free - set(self.vars), 4 + max(2 * k - 1, 0) + self.body.size)

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Int(Expr):
    value: int
    is_term = True

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise SyntaxRuleError(f"integer constant expected, got {self.value!r}")
        self._set((), 1)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr
    is_term = True

    def __post_init__(self):
        self._set(self.left.free | self.right.free, 3 + self.left.size + self.right.size)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr
    is_term = True

    def __post_init__(self):
        self._set(self.left.free | self.right.free, 3 + self.left.size + self.right.size)

    def children(self):
        return (self.left, self.right)


# -- sugar ------------------------------------------------------------------

TRUE = Truth(True)
FALSE = Truth(False)


def And(a: Expr, b: Expr) -> Expr:
    return Not(Or(Not(a), Not(b)))


def Forall(v: str, body: Expr) -> Expr:
    return Not(Exists(v, Not(body)))


def Sub(a: Expr, b: Expr) -> Expr:
    return Add(a, Mul(Int(-1), b))


def conj(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def total(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return Int(0)
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def as_and(e: Expr) -> tuple[Expr, Expr] | None:
    """Split ``e`` if it is the desugared form of a conjunction."""
    if isinstance(e, Not) and isinstance(e.sub, Or):
        l, r = e.sub.left, e.sub.right
        if isinstance(l, Not) and isinstance(r, Not):
            return l.sub, r.sub
    return None


def as_forall(e: Expr) -> tuple[str, Expr] | None:
    if isinstance(e, Not) and isinstance(e.sub, Exists) and isinstance(e.sub.body, Not):
        return e.sub.var, e.sub.body.sub
    return None


def as_sub(e: Expr) -> tuple[Expr, Expr] | None:
    if isinstance(e, Add) and isinstance(e.right, Mul):
        m = e.right
        if isinstance(m.left, Int) and m.left.value == -1:
            return e.left, m.right
    return None


def conjuncts(e: Expr) -> list[Expr]:
    """Flatten nested conjunctions; ``true`` contributes nothing."""
    out: list[Expr] = []
    stack = [e]
    while stack:
        f = stack.pop()
        pair = as_and(f)
        if pair is not None:
            stack.append(pair[1])
            stack.append(pair[0])
        elif f == TRUE:
            continue
        else:
            out.append(f)
    return out


def is_literal(e: Expr) -> bool:
    if isinstance(e, Not):
        e = e.sub
    return isinstance(e, (Atom, Eq, Dist, Truth))


def walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def count_subterms(e: Expr) -> list[Count]:
    return [n for n in walk(e) if isinstance(n, Count)]


def is_quantifier_free(e: Expr) -> bool:
    return not any(isinstance(n, (Exists, Count, NumPred)) for n in walk(e))


def quantifier_depth(e: Expr) -> int:
    if isinstance(e, Exists):
        return 1 + quantifier_depth(e.body)
    if isinstance(e, Count):
        return len(e.vars) + quantifier_depth(e.body)
    return max((quantifier_depth(c) for c in e.children()), default=0)


def count_depth(e: Expr) -> int:
    inner = max((count_depth(c) for c in e.children()), default=0)
    return inner + 1 if isinstance(e, Count) else inner


def node_count(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def relations_used(e: Expr) -> set[str]:
    return {n.rel for n in walk(e) if isinstance(n, Atom)}


def rename(e: Expr, mapping: dict[str, str]) -> Expr:
    """Rename free variables; bound variables shadow the mapping."""
    if not mapping:
        return e
    if isinstance(e, Eq):
        return Eq(mapping.get(e.a, e.a), mapping.get(e.b, e.b))
    if isinstance(e, Dist):
        return Dist(mapping.get(e.a, e.a), mapping.get(e.b, e.b), e.radius)
    if isinstance(e, Atom):
        return Atom(e.rel, tuple(mapping.get(v, v) for v in e.args))
    if isinstance(e, (Truth, Int)):
        return e
    if isinstance(e, Not):
        return Not(rename(e.sub, mapping))
    if isinstance(e, Or):
        return Or(rename(e.left, mapping), rename(e.right, mapping))
    if isinstance(e, Add):
        return Add(rename(e.left, mapping), rename(e.right, mapping))
    if isinstance(e, Mul):
        return Mul(rename(e.left, mapping), rename(e.right, mapping))
    if isinstance(e, NumPred):
        return NumPred(e.name, tuple(rename(t, mapping) for t in e.args))
    if isinstance(e, Exists):
        inner = {k: v for k, v in mapping.items() if k != e.var}
        return Exists(e.var, rename(e.body, inner))
    if isinstance(e, Count):
        inner = {k: v for k, v in mapping.items() if k not in e.vars}
        return Count(e.vars, rename(e.body, inner))
    raise IllTypedError(f"unknown node {type(e).__name__}")


_FORMULA_KINDS = (Eq, Atom, Not, Or, Exists, NumPred, Truth, Dist)
_TERM_KINDS = (Count, Int, Add, Mul)


def typecheck(e: object) -> str:
    """Return "formula" or "term"; raise IllTypedError on misplaced node kinds."""
    if isinstance(e, (Eq, Atom, Truth, Dist)):
        return "formula"
    if isinstance(e, Int):
        return "term"
    if isinstance(e, Not):
        _expect(e.sub, "formula")
        return "formula"
    if isinstance(e, Or):
        _expect(e.left, "formula")
        _expect(e.right, "formula")
        return "formula"
    if isinstance(e, Exists):
        _expect(e.body, "formula")
        return "formula"
    if isinstance(e, NumPred):
        for t in e.args:
            _expect(t, "term")
        return "formula"
    if isinstance(e, Count):
        _expect(e.body, "formula")
        return "term"
    if isinstance(e, (Add, Mul)):
        _expect(e.left, "term")
        _expect(e.right, "term")
        return "term"
    raise IllTypedError(f"not an expression node: {e!r}")


def _expect(e: Expr, kind: str) -> None:
    got = typecheck(e)
    if got != kind:
        raise IllTypedError(f"expected a {kind}, found a {got}: {type(e).__name__}")
