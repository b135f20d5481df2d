"""Semantics of FOC1 over a finite structure.

Global evaluation quantifies over the whole universe. :func:`eval_local`
evaluates on the induced radius-r neighbourhood of the assigned elements,
built through a :class:`~foclearn.relstore.LocalOracle`.
"""

from __future__ import annotations

from collections import deque
from typing import Mapping

from . import syntax as S
from .numpred import NumericalPredicateRegistry, builtin_registry
from .relstore import AccessAudit, LocalOracle, Structure, materialize

INT_CAP = 1 << 127


class EvaluationError(Exception):
    pass


class UnassignedVariableError(EvaluationError, KeyError):
    pass


class EvaluationOverflow(EvaluationError, OverflowError):
    pass


class LocalityDiscrepancy(EvaluationError):
    pass


def _checked(v: int) -> int:
    if -INT_CAP <= v < INT_CAP:
        return v
    raise EvaluationOverflow(f"integer {v} exceeds the 128-bit evaluation range")


def resolve_assignment(structure: Structure, assignment: Mapping[str, int | str]) -> dict[str, int]:
    out = {}
    for var, val in assignment.items():
        out[var] = structure.handle(val) if isinstance(val, str) else structure.check(int(val))
    return out


class Evaluator:
    def __init__(
        self,
        structure: Structure,
        registry: NumericalPredicateRegistry | None = None,
        audit: AccessAudit | None = None,
    ):
        self.s = structure
        self.reg = registry or builtin_registry()
        self.audit = audit
        self._memo: dict[tuple, bool] = {}
        self._gaifman = None

    def _scan(self) -> range:
        if self.audit is not None:
            self.audit.bump("global_scans")
        return range(len(self.s))

    def _var(self, asg: Mapping[str, int], v: str) -> int:
        try:
            return asg[v]
        except KeyError:
            raise UnassignedVariableError(f"free variable {v} is unassigned") from None

    def dist_le(self, a: int, b: int, r: int) -> bool:
        if a == b:
            return True
        if self._gaifman is None:
            self._gaifman = self.s.gaifman
        adj = self._gaifman.adjacency
        seen = {a}
        frontier = [a]
        for _ in range(r):
            nxt = []
            for v in frontier:
                for w in adj[v]:
                    if w == b:
                        return True
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
        return False

    def formula(self, e: S.Expr, asg: Mapping[str, int]) -> bool:
        if isinstance(e, S.Atom):
            return self.s.holds(e.rel, tuple(self._var(asg, v) for v in e.args))
        if isinstance(e, S.Eq):
            return self._var(asg, e.a) == self._var(asg, e.b)
        if isinstance(e, S.Not):
            return not self.formula(e.sub, asg)
        if isinstance(e, S.Or):
            return self.formula(e.left, asg) or self.formula(e.right, asg)
        if isinstance(e, S.Truth):
            return e.value
        if isinstance(e, S.Dist):
            return self.dist_le(self._var(asg, e.a), self._var(asg, e.b), e.radius)
        if isinstance(e, S.Exists):
            inner = dict(asg)
            for v in self._scan():
                inner[e.var] = v
                if self.formula(e.body, inner):
                    return True
            return False
        if isinstance(e, S.NumPred):
            vals = tuple(self.term(t, asg) for t in e.args)
            key = (e.name, vals)
            hit = self._memo.get(key)
            if hit is None:
                hit = self._memo[key] = self.reg.decide(e.name, vals)
            return hit
        raise S.IllTypedError(f"not a formula: {type(e).__name__}")

    def term(self, e: S.Expr, asg: Mapping[str, int]) -> int:
        if isinstance(e, S.Int):
            return _checked(e.value)
        if isinstance(e, S.Add):
            return _checked(self.term(e.left, asg) + self.term(e.right, asg))
        if isinstance(e, S.Mul):
            return _checked(self.term(e.left, asg) * self.term(e.right, asg))
        if isinstance(e, S.Count):
            return self._count(e, asg)
        raise S.IllTypedError(f"not a term: {type(e).__name__}")

    def _count(self, e: S.Count, asg: Mapping[str, int]) -> int:
        for v in e.free:
            self._var(asg, v)
        zs = e.vars
        inner = {k: v for k, v in asg.items() if k not in zs}
        pos = {z: i for i, z in enumerate(zs)}
        # each conjunct is checked as soon as its last bound variable is set
        levels: list[list[S.Expr]] = [[] for _ in range(len(zs) + 1)]
        for c in S.conjuncts(e.body):
            lvl = max((pos[v] + 1 for v in c.free if v in pos), default=0)
            levels[lvl].append(c)
        for c in levels[0]:
            if not self.formula(c, inner):
                return 0
        if not zs:
            return 1
        universe = self._scan()
        k = len(zs)

        def rec(i: int) -> int:
            total = 0
            checks = levels[i + 1]
            for v in universe:
                inner[zs[i]] = v
                if all(self.formula(c, inner) for c in checks):
                    total += 1 if i == k - 1 else rec(i + 1)
            return total

        return _checked(rec(0))

    def eval(self, e: S.Expr, asg: Mapping[str, int]):
        return self.formula(e, asg) if e.is_formula else self.term(e, asg)


def eval_formula(e: S.Expr, structure: Structure, assignment=None, registry=None) -> bool:
    asg = resolve_assignment(structure, assignment or {})
    return Evaluator(structure, registry).formula(e, asg)


def eval_term(e: S.Expr, structure: Structure, assignment=None, registry=None) -> int:
    asg = resolve_assignment(structure, assignment or {})
    return Evaluator(structure, registry).term(e, asg)


def evaluate(e: S.Expr, structure: Structure, assignment=None, registry=None):
    asg = resolve_assignment(structure, assignment or {})
    return Evaluator(structure, registry).eval(e, asg)


def eval_local(e: S.Expr, assignment: Mapping[str, int | str], radius: int, oracle: LocalOracle, registry=None):
    """Evaluate ``e`` on the radius-ball neighbourhood of the assigned elements.

    Correct whenever ``e`` really is ``radius``-local around its free variables.
    """
    asg = {}
    for var, val in assignment.items():
        asg[var] = oracle.handle(val) if isinstance(val, str) else int(val)
    missing = e.free - set(asg)
    if missing:
        raise UnassignedVariableError(f"free variables {sorted(missing)} are unassigned")
    centers = [asg[v] for v in sorted(e.free)]
    local, mapping = materialize(oracle, centers, radius)
    lasg = {v: mapping[h] for v, h in asg.items() if v in e.free}
    return Evaluator(local, registry).eval(e, lasg)


def check_locality(e: S.Expr, structure: Structure, assignment, radius: int, registry=None):
    """Compare neighbourhood and global evaluation; returns (local, global)."""
    asg = resolve_assignment(structure, assignment)
    loc = eval_local(e, asg, radius, LocalOracle(structure), registry)
    glob = Evaluator(structure, registry).eval(e, asg)
    return loc, glob


def assert_local(e: S.Expr, structure: Structure, assignment, radius: int, registry=None):
    loc, glob = check_locality(e, structure, assignment, radius, registry)
    if loc != glob:
        raise LocalityDiscrepancy(
            f"{S.Expr.__str__(e)} is not {radius}-local here: neighbourhood gives {loc}, global gives {glob}"
        )
    return glob
