"""Brute-force reference semantics and learner used as ground truth in tests.

Deliberately naive: element names instead of handles, tuple sets scanned
directly, distances recomputed from the raw relations. Nothing here imports
the optimised evaluator, kernels or learner.
"""

from __future__ import annotations

import itertools

from . import syntax as S
from .numpred import builtin_registry

_CAP = 1 << 127


class NaiveOverflow(OverflowError):
    pass


class _Model:
    def __init__(self, structure):
        self.universe = list(structure.names)
        self.rels = structure.named_relations()
        self.sig = dict(structure.signature.symbols)

    def linked(self, a, b):
        for tuples in self.rels.values():
            for t in tuples:
                if a in t and b in t:
                    return True
        return False

    def within(self, a, b, r):
        reach = {a}
        for _ in range(r):
            if b in reach:
                return True
            reach = reach | {w for w in self.universe for v in reach if v != w and self.linked(v, w)}
        return b in reach


def _cap(v):
    if not -_CAP <= v < _CAP:
        raise NaiveOverflow(v)
    return v


def naive_eval(e, structure, assignment=None, registry=None, _model=None):
    """Evaluate by direct recursion on the semantic rules; assignment maps vars to names."""
    model = _model or _Model(structure)
    reg = registry or builtin_registry()
    asg = {}
    for var, val in (assignment or {}).items():
        asg[var] = val if isinstance(val, str) else structure.names[val]
    return _ev(e, asg, model, reg)


def _ev(e, asg, m, reg):
    if isinstance(e, S.Eq):
        return asg[e.a] == asg[e.b]
    if isinstance(e, S.Atom):
        if m.sig[e.rel] == 0:
            return () in m.rels[e.rel]
        return tuple(asg[v] for v in e.args) in m.rels[e.rel]
    if isinstance(e, S.Truth):
        return e.value
    if isinstance(e, S.Dist):
        return m.within(asg[e.a], asg[e.b], e.radius)
    if isinstance(e, S.Not):
        return not _ev(e.sub, asg, m, reg)
    if isinstance(e, S.Or):
        return _ev(e.left, asg, m, reg) or _ev(e.right, asg, m, reg)
    if isinstance(e, S.Exists):
        return any(_ev(e.body, {**asg, e.var: a}, m, reg) for a in m.universe)
    if isinstance(e, S.NumPred):
        vals = [_ev(t, asg, m, reg) for t in e.args]
        return reg.decide(e.name, tuple(vals))
    if isinstance(e, S.Int):
        return _cap(e.value)
    if isinstance(e, S.Add):
        return _cap(_ev(e.left, asg, m, reg) + _ev(e.right, asg, m, reg))
    if isinstance(e, S.Mul):
        return _cap(_ev(e.left, asg, m, reg) * _ev(e.right, asg, m, reg))
    if isinstance(e, S.Count):
        for v in e.free:
            asg[v]
        n = 0
        for combo in itertools.product(m.universe, repeat=len(e.vars)):
            inner = dict(asg)
            inner.update(zip(e.vars, combo))
            if _ev(e.body, inner, m, reg):
                n += 1
        return n
    raise TypeError(f"unknown node {e!r}")


def naive_components(structure, elements, r):
    """Partition of positions of ``elements`` by connectivity of the induced r-neighbourhood.

    Two positions share a block iff their elements are joined by a path inside
    N_r(elements). Computed from raw tuples only.
    """
    m = _Model(structure)
    ball = set()
    for a in elements:
        ball |= {b for b in m.universe if m.within(a, b, r)}
    inner = {rel: {t for t in ts if set(t) <= ball} for rel, ts in m.rels.items()}

    def edge(a, b):
        return a != b and any(a in t and b in t for ts in inner.values() for t in ts)

    comp = {}
    for a in ball:
        if a in comp:
            continue
        stack = [a]
        comp[a] = a
        while stack:
            v = stack.pop()
            for w in ball:
                if w not in comp and edge(v, w):
                    comp[w] = a
                    stack.append(w)
    blocks = {}
    for i, a in enumerate(elements):
        blocks.setdefault(comp[a], set()).add(i)
    return sorted(sorted(b) for b in blocks.values())


def naive_learn(examples, terms, structure, ell, registry=None):
    """Exhaustive search: terms in the given order, parameters over all of A^ell.

    ``examples`` is a list of (tuple of names, label); ``terms`` yields
    sigma-terms over x1..xk, y1..y_ell. Returns (term, params) or None.
    """
    model = _Model(structure)
    reg = registry or builtin_registry()
    k = len(examples[0][0]) if examples else 0
    params = list(itertools.product(model.universe, repeat=ell))
    for t in terms:
        for w in params:
            ok = True
            for tup, label in examples:
                asg = {f"x{i + 1}": a for i, a in enumerate(tup)}
                asg.update({f"y{j + 1}": b for j, b in enumerate(w)})
                if _ev(t, asg, model, reg) != label:
                    ok = False
                    break
            if ok:
                return t, w
    return None
