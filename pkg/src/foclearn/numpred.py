"""Numerical predicates: named decision procedures over integer tuples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


class DuplicatePredicateError(ValueError):
    pass


@dataclass(frozen=True)
class NumericalPredicate:
    name: str
    arity: int
    decide: Callable[..., bool]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases; exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _divides(a: int, b: int) -> bool:
    if a == 0:
        return b == 0
    return b % a == 0


class NumericalPredicateRegistry:
    def __init__(self):
        self._entries: dict[str, NumericalPredicate] = {}

    def register(self, name: str, arity: int, decide: Callable[..., bool]) -> None:
        if name in self._entries:
            raise DuplicatePredicateError(f"numerical predicate {name} already registered")
        if arity < 1:
            raise ValueError("numerical predicates take at least one argument")
        self._entries[name] = NumericalPredicate(name, arity, decide)

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def get(self, name: str) -> NumericalPredicate:
        try:
            return self._entries[name]
        except KeyError:
            raise KeyError(f"unknown numerical predicate {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._entries)

    def decide(self, name: str, args: tuple[int, ...]) -> bool:
        p = self.get(name)
        if len(args) != p.arity:
            raise ValueError(f"{name} expects {p.arity} arguments, got {len(args)}")
        return bool(p.decide(*args))


def builtin_registry() -> NumericalPredicateRegistry:
    reg = NumericalPredicateRegistry()
    builtins = [
        ("eq", 2, lambda a, b: a == b),
        ("leq", 2, lambda a, b: a <= b),
        ("prime", 1, is_prime),
        ("divides", 2, _divides),
    ]
    for short, arity, fn in builtins:
        reg.register(f"P_{short}", arity, fn)
        reg.register(f"P{short}", arity, fn)
    return reg
