"""Distance and component-pattern formulas, locality radii, and localisation.

Localisation expands the signature by fresh predicates of arity at most one
so that a formula becomes a Boolean combination of local formulas and 0-ary
atoms. Two modes exist: ``AlreadyLocal`` (trust a declared radius after a
sampling check) and ``Hanf`` (replace quantified subformulas with one free
variable by unary predicates computed per neighbourhood type).
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from . import syntax as S
from .evaluator import Evaluator, eval_local
from .relstore import LocalOracle, Signature, Structure, bfs_distances


class LocalisationError(Exception):
    pass


class UnsupportedFragment(LocalisationError):
    pass


def nu(d: int, r: int) -> int:
    if d < 0 or r < 0:
        raise ValueError("d and r must be non-negative")
    return 1 + d * sum((d - 1) ** i for i in range(r))


# -- distance formulas ------------------------------------------------------

def adjacency_formula(signature: Signature, x: str, y: str, fresh) -> S.Expr:
    """x and y co-occur in some tuple (x = y not excluded)."""
    parts = []
    for rel, arity in signature:
        if arity < 2:
            continue
        for i, j in itertools.permutations(range(arity), 2):
            others = [next(fresh) for _ in range(arity - 2)]
            it = iter(others)
            args = tuple(x if p == i else y if p == j else next(it) for p in range(arity))
            f: S.Expr = S.Atom(rel, args)
            for v in reversed(others):
                f = S.Exists(v, f)
            parts.append(f)
    return S.disj(parts)


def dist_formula(r: int, signature: Signature, x: str = "x", y: str = "y") -> S.Expr:
    """A plain first-order formula stating dist(x, y) <= r."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    counter = itertools.count()
    fresh = (f"dm{i}" for i in counter)
    return _dist(r, signature, x, y, fresh)


def _dist(r, signature, x, y, fresh):
    if r == 0:
        return S.Eq(x, y)
    if r == 1:
        return S.Or(S.Eq(x, y), adjacency_formula(signature, x, y, fresh))
    m = next(fresh)
    left = _dist((r + 1) // 2, signature, x, m, fresh)
    right = _dist(r // 2, signature, m, y, fresh)
    return S.Exists(m, S.And(left, right))


def expand_dist(e: S.Expr, signature: Signature) -> S.Expr:
    """Replace every Dist node by its first-order definition."""
    counter = itertools.count()
    fresh = (f"dm{i}" for i in counter)

    def go(n):
        if isinstance(n, S.Dist):
            return _dist(n.radius, signature, n.a, n.b, fresh)
        return map_children(n, go)

    return go(e)


def map_children(n: S.Expr, fn) -> S.Expr:
    if isinstance(n, S.Not):
        return S.Not(fn(n.sub))
    if isinstance(n, S.Or):
        return S.Or(fn(n.left), fn(n.right))
    if isinstance(n, S.Exists):
        return S.Exists(n.var, fn(n.body))
    if isinstance(n, S.Count):
        return S.Count(n.vars, fn(n.body))
    if isinstance(n, S.Add):
        return S.Add(fn(n.left), fn(n.right))
    if isinstance(n, S.Mul):
        return S.Mul(fn(n.left), fn(n.right))
    if isinstance(n, S.NumPred):
        return S.NumPred(n.name, tuple(fn(t) for t in n.args))
    return n


# -- component patterns -----------------------------------------------------

@dataclass(frozen=True)
class ComponentPattern:
    """Undirected simple graph on vertices 0..n-1 plus the distance parameter."""

    n: int
    edges: frozenset
    radius: int

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            a, b = tuple(e)
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError("edge endpoint out of range")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    def components(self) -> list[list[int]]:
        return graph_components(range(self.n), self.edges)

    @property
    def connected(self) -> bool:
        return len(self.components()) <= 1


def graph_components(vertices, edges) -> list[list[int]]:
    vs = list(vertices)
    parent = {v: v for v in vs}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=vs.index)] = min(ra, rb, key=vs.index)
    comps: dict = {}
    for v in vs:
        comps.setdefault(find(v), []).append(v)
    return sorted(comps.values(), key=lambda c: vs.index(c[0]))


def all_patterns(n: int, radius: int):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield ComponentPattern(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1), radius)


def delta_literals(variables, edges, radius: int) -> list[S.Expr]:
    """dist <= radius on edges, dist > radius on non-edges, pairs in vertex order."""
    vs = list(variables)
    eset = {frozenset(e) for e in edges}
    out = []
    for i, j in itertools.combinations(range(len(vs)), 2):
        lit = S.Dist(vs[i], vs[j], radius)
        out.append(lit if frozenset((vs[i], vs[j])) in eset or frozenset((i, j)) in eset else S.Not(lit))
    return out


def delta_formula(p: ComponentPattern, variables=None) -> S.Expr:
    vs = list(variables) if variables is not None else [f"x{i + 1}" for i in range(p.n)]
    if len(vs) != p.n:
        raise ValueError("one variable per pattern vertex is required")
    return S.conj(delta_literals(vs, p.edges, p.radius))


# -- syntactic locality ------------------------------------------------------

def _high_arity(signature: Signature) -> bool:
    return any(a >= 3 for _, a in signature)


def guard_conjuncts(e: S.Expr) -> list[S.Expr]:
    """Formulas implied by ``e`` via conjunction and De Morgan."""
    if isinstance(e, S.Not):
        s = e.sub
        if isinstance(s, S.Or):
            return guard_conjuncts(S.Not(s.left)) + guard_conjuncts(S.Not(s.right))
        if isinstance(s, S.Not):
            return guard_conjuncts(s.sub)
    if isinstance(e, S.Exists):
        # conjuncts not mentioning the bound variable hold outside it too
        return [e] + [c for c in guard_conjuncts(e.body) if e.var not in c.free]
    return [e]


def _guard_reach(var: str, reach: dict, body: S.Expr):
    """Distance bound from ``var`` to the anchors via a conjunct of ``body``."""
    best = None
    for c in guard_conjuncts(body):
        if isinstance(c, S.Atom):
            vs, g = set(c.args), 1
        elif isinstance(c, S.Eq):
            vs, g = {c.a, c.b}, 0
        elif isinstance(c, S.Dist):
            vs, g = {c.a, c.b}, c.radius
        else:
            continue
        hits = [reach[a] for a in vs if a in reach and a != var]
        if var in vs and hits:
            cand = g + min(hits)
            if best is None or cand < best:
                best = cand
    return best


def local_radius(e: S.Expr, signature: Signature) -> int | None:
    """A radius r such that ``e`` is r-local around its free variables, or None."""
    bump = 1 if _high_arity(signature) else 0

    def go(n):
        if isinstance(n, (S.Atom, S.Eq, S.Truth, S.Int)):
            return 0
        if isinstance(n, S.Dist):
            return n.radius // 2 + bump
        if isinstance(n, (S.Not, S.Or, S.Add, S.Mul, S.NumPred)):
            rs = [go(c) for c in n.children()]
            return None if any(r is None for r in rs) else max(rs, default=0)
        if isinstance(n, (S.Exists, S.Count)):
            bound = [n.var] if isinstance(n, S.Exists) else list(n.vars)
            inner = go(n.body)
            if inner is None:
                return None
            anchors = set(n.free)
            if not anchors:
                return None
            reach = {a: 0 for a in anchors}
            pending = list(bound)
            while pending:
                progress = False
                for z in list(pending):
                    g = _guard_reach(z, reach, n.body)
                    if g is not None:
                        reach[z] = g
                        pending.remove(z)
                        progress = True
                if not progress:
                    return None
            return max((reach[z] for z in bound), default=0) + inner + bump
        raise S.IllTypedError(repr(n))

    return go(e)


# -- neighbourhood types ----------------------------------------------------

def neighbourhood_type(s: Structure, center: int, radius: int, max_perms: int = 720):
    """An isomorphism-invariant key for the radius-ball around ``center``.

    Equal keys imply isomorphic pointed neighbourhoods. Distinct keys for
    isomorphic ones only reduce sharing.
    """
    dist = bfs_distances(s.gaifman, [center], radius)
    ball = sorted(dist)
    local = s.induced(ball)
    idx = {h: i for i, h in enumerate(ball)}
    n = len(ball)
    rels = [(rel, sorted(local.relation(rel))) for rel, a in local.signature if a > 0]
    nullary = tuple(sorted((rel, local.nullary(rel)) for rel, a in local.signature if a == 0))
    colour = [None] * n
    for h, i in idx.items():
        colour[i] = (dist[h], tuple(int((i,) in local.relation(r)) for r, a in local.signature if a == 1))
    for _ in range(n):
        inc: list[list] = [[] for _ in range(n)]
        for rel, tuples in rels:
            for t in tuples:
                cs = tuple(colour[e] for e in t)
                for p, e in enumerate(t):
                    inc[e].append((rel, p, cs))
        new = [(colour[i], tuple(sorted(inc[i]))) for i in range(n)]
        ranks = {c: j for j, c in enumerate(sorted(set(new)))}
        new = [ranks[c] for c in new]
        if len(set(new)) == len(set(map(repr, colour))):
            colour = new
            break
        colour = new
    classes: dict = {}
    for i in range(n):
        classes.setdefault(colour[i], []).append(i)
    groups = [classes[c] for c in sorted(classes)]
    best = None
    for count, perm in enumerate(itertools.product(*(itertools.permutations(g) for g in groups))):
        if count >= max_perms:
            break
        order = [i for part in perm for i in part]
        pos = {v: j for j, v in enumerate(order)}
        enc = tuple((rel, tuple(sorted(tuple(pos[e] for e in t) for t in tuples))) for rel, tuples in rels)
        if best is None or enc < best:
            best = enc
    return (n, tuple(sorted(colour)), nullary, best)


# -- localisation -----------------------------------------------------------

@dataclass(frozen=True)
class AlreadyLocal:
    radius: int
    samples: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class Hanf:
    radius_cap: int = 2
    quantifier_cap: int = 3
    per_type: bool = False


@dataclass
class LocalisationOutput:
    signature: Signature
    structure: Structure
    formula: S.Expr
    radius: int
    added: tuple = ()
    report: dict = field(default_factory=dict)

    def report_json(self) -> str:
        return json.dumps(self.report, sort_keys=True)


def localise(phi: S.Expr, s: Structure, mode, registry=None, prefix: str = "L") -> LocalisationOutput:
    if isinstance(mode, AlreadyLocal):
        return _already_local(phi, s, mode, registry)
    if isinstance(mode, Hanf):
        return _hanf(phi, s, mode, registry, prefix)
    raise LocalisationError(f"unknown mode {mode!r}")


def _assignments(free, n, samples, seed):
    space = n ** len(free)
    if space <= samples:
        yield from itertools.product(range(n), repeat=len(free))
        return
    rng = random.Random(seed)
    for _ in range(samples):
        yield tuple(rng.randrange(n) for _ in free)


def _already_local(phi, s, mode, registry):
    free = sorted(phi.free)
    oracle = LocalOracle(s)
    ev = Evaluator(s, registry)
    checked = 0
    if s.size or not free:
        for vals in _assignments(free, s.size, mode.samples, mode.seed):
            asg = dict(zip(free, vals))
            loc = eval_local(phi, asg, mode.radius, oracle, registry)
            glob = ev.eval(phi, asg)
            checked += 1
            if loc != glob:
                names = {v: s.name(h) for v, h in asg.items()}
                raise LocalisationError(
                    f"sampling check failed: not {mode.radius}-local at {names} (local {loc}, global {glob})"
                )
    report = {"mode": "already_local", "radius": mode.radius, "samples_checked": checked, "predicates": []}
    return LocalisationOutput(s.signature, s, phi, mode.radius, (), report)


def _has_quantifier(e):
    return not S.is_quantifier_free(e)


def _hanf(phi, s, mode, registry, prefix):
    if S.quantifier_depth(phi) > mode.quantifier_cap:
        raise UnsupportedFragment(
            f"quantifier depth {S.quantifier_depth(phi)} exceeds cap {mode.quantifier_cap}; "
            "use already_local mode instead"
        )
    state = {"s": s, "added": [], "preds": [], "n": 0, "types": 0, "type_radius": 0}

    def fresh():
        name = f"{prefix}{state['n']}"
        state["n"] += 1
        while name in state["s"].signature:
            name = f"{prefix}{state['n']}"
            state["n"] += 1
        return name

    def add(name, arity, tuples, info):
        state["s"] = state["s"].expand([(name, arity)], {name: tuples})
        state["added"].append((name, arity))
        state["preds"].append(info)

    # closed quantified subformulas become 0-ary truth atoms
    def closed_pass(n):
        if n.is_formula and not n.free and _has_quantifier(n):
            value = Evaluator(state["s"], registry).formula(n, {})
            name = fresh()
            add(name, 0, [()] if value else [], {"name": name, "arity": 0, "source": str(n), "value": value})
            return S.Atom(name, ())
        return map_children(n, closed_pass)

    def unary_pass(n):
        if not n.is_formula or not _has_quantifier(n):
            return n
        if len(n.free) == 1:
            r = local_radius(n, state["s"].signature)
            if r is not None and r <= mode.radius_cap:
                return _unary_predicate(n, r)
        if isinstance(n, (S.Not, S.Or)):
            return map_children(n, unary_pass)
        r = local_radius(n, state["s"].signature)
        if r is not None:
            return n
        raise UnsupportedFragment(f"subformula {n} is outside the supported fragment; use already_local mode")

    def _unary_predicate(n, r):
        cur = state["s"]
        (var,) = tuple(n.free)
        cache: dict = {}
        values = []
        for v in range(cur.size):
            key = neighbourhood_type(cur, v, r)
            if key not in cache:
                dist = bfs_distances(cur.gaifman, [v], r)
                loc = cur.induced(dist)
                lv = sorted(dist).index(v)
                cache[key] = (len(cache), Evaluator(loc, registry).formula(n, {var: lv}))
            values.append(cache[key])
        state["types"] += len(cache)
        state["type_radius"] = max(state["type_radius"], r)
        if mode.per_type:
            parts = []
            for tid in range(len(cache)):
                name = fresh()
                members = [(v,) for v, (t, _) in enumerate(values) if t == tid]
                holds = next(val for t, val in values if t == tid)
                add(name, 1, members, {"name": name, "arity": 1, "source": str(n), "radius": r, "holds": holds})
                if holds:
                    parts.append(S.Atom(name, (var,)))
            return S.disj(parts)
        name = fresh()
        add(name, 1, [(v,) for v, (_, val) in enumerate(values) if val],
            {"name": name, "arity": 1, "source": str(n), "radius": r, "types": len(cache)})
        return S.Atom(name, (var,))

    out = unary_pass(closed_pass(phi))
    syntactic = local_radius(out, state["s"].signature)
    radius = max(syntactic or 0, state["type_radius"], 1 if out.free else 0)
    report = {
        "mode": "hanf",
        "radius": radius,
        "syntactic_radius": syntactic,
        "type_radius": state["type_radius"],
        "types_realized": state["types"],
        "predicates": state["preds"],
    }
    return LocalisationOutput(state["s"].signature, state["s"], out, radius, tuple(state["added"]), report)
