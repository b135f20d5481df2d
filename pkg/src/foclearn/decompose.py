"""Rewriting counting terms into connected-local pieces.

A count ``#z.(phi)`` over vertex set V (its free variables followed by z) is
split over all graphs G on V by conjoining the component formula delta_G.
Each summand is then rewritten by induction on the components of G: a
connected G yields a piece; otherwise

    T(a & b, G) = T(a, G[C1]) * T(b, G[C2]) - sum_H T(a & b, H)

where H ranges over the graphs that agree with G inside C1 and C2 and add
at least one cross edge. Results are symbolic skeletons over pieces so the
same rewrite serves every structure and every parameter choice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

from . import kernels
from . import syntax as S
from .grammar import is_x, is_y, var_key
from .locality import delta_literals, graph_components, nu
from .parser import to_text


class FragmentError(ValueError):
    """The input lies outside the component-separable fragment."""


# -- small graph helpers ----------------------------------------------------

def _edge(a, b):
    return frozenset((a, b))


def component_split(vertices, edges):
    """(C1, C2, edges of G[C1], edges of G[C2]); C1 is the first vertex's component."""
    vs = list(vertices)
    if not vs:
        raise ValueError("graph must have at least one vertex")
    pairs = [tuple(e) for e in edges]
    comps = graph_components(vs, pairs)
    c1 = comps[0]
    s1 = set(c1)
    c2 = [v for v in vs if v not in s1]
    e1 = frozenset(_edge(*e) for e in pairs if set(e) <= s1)
    e2 = frozenset(_edge(*e) for e in pairs if not set(e) & s1)
    return tuple(c1), tuple(c2), e1, e2


def tuple_eq_in_set(w, w2, n) -> bool:
    """w agrees with w2 on every coordinate where w's entry lies in n."""
    if len(w) != len(w2):
        raise ValueError("tuples must have equal length")
    ns = set(n)
    return all(a == b for a, b in zip(w, w2) if a in ns)


# -- Boolean helpers ---------------------------------------------------------

def _simplify(f: S.Expr, fixed: dict) -> S.Expr:
    if f in fixed:
        return S.TRUE if fixed[f] else S.FALSE
    if isinstance(f, S.Not):
        sub = _simplify(f.sub, fixed)
        if isinstance(sub, S.Truth):
            return S.FALSE if sub.value else S.TRUE
        if isinstance(sub, S.Not):
            return sub.sub
        return S.Not(sub)
    if isinstance(f, S.Or):
        a, b = _simplify(f.left, fixed), _simplify(f.right, fixed)
        if a == S.TRUE or b == S.TRUE:
            return S.TRUE
        if a == S.FALSE:
            return b
        if b == S.FALSE:
            return a
        return S.Or(a, b)
    return f


def _first(f: S.Expr, pred):
    for n in S.walk(f):
        if pred(n):
            return n
    return None


# -- pair decomposition -----------------------------------------------------

@dataclass(frozen=True)
class PairDecomposition:
    pairs: tuple[tuple[S.Expr, S.Expr], ...]
    side1: frozenset
    side2: frozenset

    def holds(self, eval1, eval2) -> bool:
        """Exactly-one semantics given evaluators for each side."""
        hits = sum(1 for a, b in self.pairs if eval1(a) and eval2(b))
        if hits > 1:
            raise AssertionError("pairs are not mutually exclusive")
        return hits == 1


def fv_decompose(phi: S.Expr, side1, side2) -> PairDecomposition:
    """Mutually exclusive (alpha, beta) pairs equivalent to ``phi``.

    phi must be a Boolean combination of blocks whose free variables lie on
    one side. Closed blocks go to the first side.
    """
    s1, s2 = frozenset(side1), frozenset(side2)
    if s1 & s2:
        raise ValueError("partition sides overlap")

    def is_block(n):
        return n.free <= s1 or n.free <= s2

    def check(n):
        if is_block(n):
            return
        if isinstance(n, (S.Not, S.Or)):
            for c in n.children():
                check(c)
            return
        raise FragmentError(f"subformula {to_text(n)} mixes both sides of the partition")

    check(phi)

    def side1_block(f):
        # outermost one-sided subformula with free vars on side 1
        stack = [f]
        while stack:
            n = stack.pop(0)
            if n.free <= s1 and not isinstance(n, S.Truth):
                return n
            if n.free <= s2:
                continue
            stack.extend(n.children())
        return None

    pairs = []

    def branch(f, path):
        if f == S.FALSE:
            return
        b = side1_block(f)
        if b is None:
            pairs.append((S.conj(path), f))
            return
        for val in (True, False):
            branch(_simplify(f, {b: val}), path + [b if val else _negate(b)])

    branch(phi, [])
    return PairDecomposition(tuple(pairs), s1, s2)


def _negate(f):
    return f.sub if isinstance(f, S.Not) else S.Not(f)


# -- cubes ------------------------------------------------------------------

def _canon(lits) -> tuple:
    return tuple(sorted(set(lits), key=to_text))


def exclusive_cubes(body: S.Expr) -> list[tuple]:
    """Mutually exclusive literal conjunctions whose disjunction is ``body``."""
    if not S.is_quantifier_free(body):
        raise FragmentError(f"counting body {to_text(body)} is not quantifier-free")
    parts = S.conjuncts(body)
    if all(S.is_literal(p) for p in parts):
        cube = _fold(parts)
        return [] if cube is None else [cube]
    out = []

    def branch(f, path):
        if f == S.FALSE:
            return
        if f == S.TRUE:
            cube = _fold(path)
            if cube is not None:
                out.append(cube)
            return
        atom = _first(f, lambda n: isinstance(n, (S.Atom, S.Eq, S.Dist)))
        branch(_simplify(f, {atom: True}), path + [atom])
        branch(_simplify(f, {atom: False}), path + [S.Not(atom)])

    branch(body, [])
    return out


def _fold(lits):
    """Drop true literals; None if the conjunction is unsatisfiable syntactically."""
    keep = []
    for l in lits:
        node = l.sub if isinstance(l, S.Not) else l
        neg = isinstance(l, S.Not)
        if isinstance(node, S.Truth):
            if node.value == neg:
                return None
            continue
        if isinstance(node, S.Eq) and node.a == node.b:
            if neg:
                return None
            continue
        keep.append(l)
    cube = _canon(keep)
    texts = {to_text(l) for l in cube}
    for l in cube:
        if isinstance(l, S.Not) and to_text(l.sub) in texts:
            return None
    return cube


def _lit_vars(l):
    node = l.sub if isinstance(l, S.Not) else l
    if isinstance(node, S.Atom):
        return list(dict.fromkeys(node.args))
    if isinstance(node, (S.Eq, S.Dist)):
        return [node.a, node.b]
    return []


def reduce_cube(cube, edges, rho: int, comp_of=None):
    """Simplify a cube under delta_G; None when it contradicts delta_G."""
    out = []
    for l in cube:
        neg = isinstance(l, S.Not)
        node = l.sub if neg else l
        vs = _lit_vars(l)
        far = any(_edge(a, b) not in edges for a, b in itertools.combinations(vs, 2) if a != b)
        if isinstance(node, S.Dist) and node.a != node.b:
            close = _edge(node.a, node.b) in edges
            if close and node.radius >= rho:
                if neg:
                    return None
                continue
            if not close and node.radius <= rho:
                if neg:
                    continue
                return None
            if comp_of is not None and comp_of[node.a] != comp_of[node.b]:
                raise FragmentError(f"{to_text(l)} cannot be decided across components")
            out.append(l)
            continue
        if far:
            if neg:
                continue
            return None
        out.append(l)
    return _canon(out)


# -- pieces and skeletons ---------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """#(bound).(literals) with delta over a connected graph; bound named z1.."""

    free: tuple[str, ...]
    bound: tuple[str, ...]
    literals: tuple[S.Expr, ...]
    rho: int

    @cached_property
    def expr(self) -> S.Count:
        return S.Count(self.bound, S.conj(self.literals))

    @cached_property
    def key(self) -> str:
        return to_text(self.expr)

    @property
    def kind(self) -> str:
        xs = any(is_x(v) for v in self.free)
        ys = any(is_y(v) for v in self.free)
        if not self.free:
            return "ground"
        if xs and ys:
            return "xy"
        return "x" if xs else "y"

    @property
    def ys(self) -> frozenset:
        return frozenset(v for v in self.free if is_y(v))

    @property
    def radius(self) -> int:
        """Witnesses lie within this distance of the free variables."""
        return self.rho * len(self.bound)

    @classmethod
    def from_count(cls, c: S.Count, rho: int) -> "Piece":
        lits = S.conjuncts(c.body)
        for l in lits:
            if not S.is_literal(l):
                raise FragmentError(f"{to_text(c)} is not a conjunction of literals")
        free = tuple(sorted(c.free, key=var_key))
        vs = list(free) + list(c.vars)
        edges = set()
        seen = set()
        for l in lits:
            node = l.sub if isinstance(l, S.Not) else l
            if isinstance(node, S.Dist) and node.radius == rho:
                seen.add(_edge(node.a, node.b))
                if not isinstance(l, S.Not):
                    edges.add(_edge(node.a, node.b))
        for a, b in itertools.combinations(vs, 2):
            if _edge(a, b) not in seen:
                raise FragmentError(f"{to_text(c)} lacks a distance constraint on ({a},{b})")
        if len(graph_components(vs, [tuple(e) for e in edges])) > 1:
            raise FragmentError(f"{to_text(c)} is not connected-local")
        return cls(free, tuple(c.vars), tuple(lits), rho)


def make_piece(cube, vertices, edges, rho: int) -> Piece:
    free = tuple(v for v in vertices if not _is_bound(v))
    bound = tuple(v for v in vertices if _is_bound(v))
    ren = {z: f"z{i + 1}" for i, z in enumerate(bound)}
    lits = [S.rename(l, ren) for l in cube]
    vs = [ren.get(v, v) for v in vertices]
    es = [(ren.get(a, a), ren.get(b, b)) for a, b in (tuple(e) for e in edges)]
    delta = delta_literals(vs, es, rho)
    return Piece(free, tuple(ren[z] for z in bound), _canon(lits) + tuple(delta), rho)


def _is_bound(v: str) -> bool:
    return not (is_x(v) or is_y(v))


# skeleton nodes: ("c", int) | ("p", key) | ("+", a, b) | ("*", a, b)
ZERO = ("c", 0)
ONE = ("c", 1)


def s_add(a, b):
    if a[0] == "c" and b[0] == "c":
        return ("c", a[1] + b[1])
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return ("+", a, b)


def s_mul(a, b):
    if a[0] == "c" and b[0] == "c":
        return ("c", a[1] * b[1])
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return ("*", a, b)


def s_eval(node, value):
    """Evaluate a skeleton; ``value(key)`` supplies piece values."""
    tag = node[0]
    if tag == "c":
        return node[1]
    if tag == "p":
        return value(node[1])
    a, b = s_eval(node[1], value), s_eval(node[2], value)
    return a + b if tag == "+" else a * b


def s_keys(node, out=None) -> set:
    out = set() if out is None else out
    if node[0] == "p":
        out.add(node[1])
    elif node[0] in "+*":
        s_keys(node[1], out)
        s_keys(node[2], out)
    return out


def s_degree(node, key) -> int:
    tag = node[0]
    if tag == "c":
        return 0
    if tag == "p":
        return 1 if node[1] == key else 0
    a, b = s_degree(node[1], key), s_degree(node[2], key)
    return max(a, b) if tag == "+" else a + b


def s_to_expr(node, subst) -> S.Expr:
    """Build a term; ``subst(key)`` returns an Expr or int for each piece."""
    tag = node[0]
    if tag == "c":
        return S.Int(node[1])
    if tag == "p":
        v = subst(node[1])
        return S.Int(v) if isinstance(v, int) else v
    a, b = s_to_expr(node[1], subst), s_to_expr(node[2], subst)
    if tag == "*":
        if isinstance(a, S.Int) and isinstance(b, S.Int):
            return S.Int(a.value * b.value)
        if a == S.Int(0) or b == S.Int(0):
            return S.Int(0)
        if a == S.Int(1):
            return b
        if b == S.Int(1):
            return a
        return S.Mul(a, b)
    if isinstance(a, S.Int) and isinstance(b, S.Int):
        return S.Int(a.value + b.value)
    if a == S.Int(0):
        return b
    if b == S.Int(0):
        return a
    return S.Add(a, b)


def s_json(node):
    if node[0] == "c":
        return node[1]
    if node[0] == "p":
        return {"piece": node[1]}
    return {node[0]: [s_json(node[1]), s_json(node[2])]}


class Decomposer:
    """Symbolic rewriting with memoisation shared across terms."""

    def __init__(self, rho: int, max_vertices: int = 12):
        self.rho = rho
        self.max_vertices = max_vertices
        self.pieces: dict[str, Piece] = {}
        self._memo: dict = {}
        self._count_memo: dict = {}

    def piece(self, cube, vertices, edges):
        if not any(_is_bound(v) for v in vertices) and not cube and len(vertices) == 1:
            return ONE
        p = make_piece(cube, vertices, edges, self.rho)
        self.pieces.setdefault(p.key, p)
        return ("p", p.key)

    def rewrite(self, cube, vertices, edges):
        key = (cube, vertices, edges)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        comps = graph_components(vertices, [tuple(e) for e in edges])
        if len(comps) == 1:
            out = self.piece(cube, vertices, edges)
        else:
            c1, c2, e1, e2 = component_split(vertices, edges)
            pairs = fv_decompose(S.conj(cube), c1, c2).pairs
            out = ZERO
            cross = [_edge(a, b) for a in c1 for b in c2]
            # blocks may be compound; re-expand each half into exclusive literal cubes
            halves = [
                (a_cube, b_cube)
                for alpha, beta in pairs
                for a_cube in exclusive_cubes(alpha)
                for b_cube in exclusive_cubes(beta)
            ]
            for a_cube, b_cube in halves:
                left = self.rewrite(a_cube, c1, e1)
                right = self.rewrite(b_cube, c2, e2) if left != ZERO else ZERO
                term = s_mul(left, right)
                both = _canon(a_cube + b_cube)
                for mask in range(1, 1 << len(cross)):
                    h = edges | {cross[i] for i in range(len(cross)) if mask >> i & 1}
                    red = reduce_cube(both, h, self.rho)
                    if red is None:
                        continue
                    term = s_add(term, s_mul(("c", -1), self.rewrite(red, vertices, frozenset(h))))
                out = s_add(out, term)
        self._memo[key] = out
        return out

    def count(self, c: S.Count, per_graph: bool = False):
        """Skeleton of ``#z.(body)``; optionally also the per-graph skeletons."""
        hit = self._count_memo.get(c)
        if hit is not None and not per_graph:
            return hit
        free = sorted(c.free, key=var_key)
        vertices = tuple(free) + tuple(c.vars)
        if len(vertices) > self.max_vertices:
            raise FragmentError(f"{len(vertices)} vertices exceed the configured maximum")
        cubes = exclusive_cubes(c.body)
        pairs = list(itertools.combinations(vertices, 2))
        total = ZERO
        graphs = {}
        for mask in range(1 << len(pairs)):
            edges = frozenset(_edge(*pairs[i]) for i in range(len(pairs)) if mask >> i & 1)
            comp = {}
            for i, part in enumerate(graph_components(vertices, [tuple(e) for e in edges])):
                for v in part:
                    comp[v] = i
            g_total = ZERO
            for cube in cubes:
                red = reduce_cube(cube, edges, self.rho, comp)
                if red is not None:
                    g_total = s_add(g_total, self.rewrite(red, vertices, edges))
            graphs[edges] = g_total
            total = s_add(total, g_total)
        self._count_memo[c] = total
        return (total, graphs) if per_graph else total

    def term(self, t: S.Expr):
        if isinstance(t, S.Int):
            return ("c", t.value)
        if isinstance(t, S.Count):
            return self.count(t)
        if isinstance(t, S.Add):
            return s_add(self.term(t.left), self.term(t.right))
        if isinstance(t, S.Mul):
            return s_mul(self.term(t.left), self.term(t.right))
        raise FragmentError(f"{to_text(t)} is not a term built from counts, integers, + and *")


# -- piece evaluation -------------------------------------------------------

class PieceEvaluator:
    """Evaluates pieces on a kernel graph, caching compiled programs."""

    def __init__(self, kg: kernels.KernelGraph):
        self.kg = kg
        self._progs: dict[str, kernels.Program] = {}

    def program(self, p: Piece):
        prog = self._progs.get(p.key)
        if prog is None:
            prog = kernels.compile_program(p.literals, list(p.free) + list(p.bound), self.kg)
            self._progs[p.key] = prog
        return prog

    def value(self, p: Piece, asg: dict) -> int:
        """Count at the given handles; ground pieces are counted over the whole graph."""
        prog = self.program(p)
        if not p.free:
            return kernels.ground_count(self.kg, prog, p.radius)[0]
        prefix = [asg[v] for v in p.free]
        cands = kernels.ball(self.kg, prefix, p.radius) if p.bound else []
        return kernels.count_extensions(self.kg, prog, prefix, cands)[0]


# -- decomposition result ---------------------------------------------------

@dataclass
class DecompositionResult:
    term: S.Expr
    per_graph: dict
    constants: list
    bound: int
    neighbourhood: frozenset
    trace: dict = field(default_factory=dict)

    def trace_json(self) -> str:
        return json.dumps(self.trace, sort_keys=True)


def constant_bound(ell: int, d: int, rho: int, m: int, cap: int = 1 << 127) -> int:
    return min((ell * nu(d, rho * m)) ** m, cap)


def decompose_term(t: S.Expr, structure, tuples, w, locality_radius: int = 0, max_vertices: int = 12):
    """Rewrite ``t`` (over x1.., y1..) for training tuples ``tuples`` and parameters ``w``.

    Returns a term over the same variables that agrees with ``t`` at every
    (v_i, w') with w matching w on the neighbourhood N of the tuples.
    """
    rho = 2 * locality_radius + 1
    dec = Decomposer(rho, max_vertices)
    counts = S.count_subterms(t)
    m = max((len(c.vars) for c in counts), default=0)
    ell = len(w)
    kg = kernels.KernelGraph(structure)
    centers = sorted({h for tup in tuples for h in tup})
    n_set = frozenset(int(v) for v in kernels.ball(kg, centers, rho * (ell + m))) if centers else frozenset()
    y_in = {f"y{j + 1}" for j, v in enumerate(w) if v in n_set}
    ev = PieceEvaluator(kg)
    wasg = {f"y{j + 1}": v for j, v in enumerate(w)}
    bound = constant_bound(ell, structure.gaifman.degree, rho, m)
    constants = []

    def subst(key):
        p = dec.pieces[key]
        kind = p.kind
        if kind in ("ground", "x"):
            return p.expr
        if kind == "xy":
            return p.expr if p.ys <= y_in else 0
        val = ev.value(p, wasg)
        constants.append(val)
        return val

    def build(n):
        if isinstance(n, S.Count):
            return s_to_expr(dec.count(n), subst)
        if isinstance(n, S.Int):
            return n
        if isinstance(n, (S.Add, S.Mul)):
            return type(n)(build(n.left), build(n.right))
        raise FragmentError(f"{to_text(n)} is not a counting term combination")

    out = build(t)
    used = list(constants)
    per_graph = {}
    trace = {}
    for c in counts:
        _, graphs = dec.count(c, per_graph=True)
        per_graph[to_text(c)] = {_graph_name(e): s_to_expr(g, subst) for e, g in graphs.items()}
        trace[to_text(c)] = {_graph_name(e): s_json(g) for e, g in graphs.items()}
    return DecompositionResult(out, per_graph, used, bound, n_set, trace)


def _graph_name(edges) -> str:
    return ",".join(sorted("-".join(sorted(e, key=var_key)) for e in edges)) or "-"
