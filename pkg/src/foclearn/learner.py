"""Learn phase: search library terms and parameters using local access only.

For each library term the rewritten skeleton is instantiated per choice of
which parameter coordinates fall inside the training neighbourhood N and
per parameter tuple over N. Pieces that mention only parameters become
integer slots whose values are searched directly, which is exactly the
freedom the rewritten candidate class allows.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

from . import kernels
from . import syntax as S
from .decompose import (
    Decomposer,
    Piece,
    PieceEvaluator,
    ZERO,
    constant_bound,
    s_add,
    s_degree,
    s_eval,
    s_keys,
    s_mul,
    s_to_expr,
)
from .grammar import HypothesisClassConfig, Library, yvars
from .parser import parse_term, to_text
from .precompute import IndexArtifact
from .relstore import AccessAudit, LocalOracle, Signature, bfs_distances, materialize

INT_CAP = 1 << 127


class LearnerError(Exception):
    pass


class ContradictoryLabels(LearnerError, ValueError):
    pass


class StaleIndexError(LearnerError):
    pass


class AuditViolation(AssertionError):
    pass


class CapOverflow(LearnerError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"candidate space has at least {count} terms, cap is {cap}")
        self.count = count


@dataclass(frozen=True)
class TrainingSet:
    examples: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_pairs(cls, pairs, structure=None) -> "TrainingSet":
        seen: dict[tuple[int, ...], int] = {}
        for tup, label in pairs:
            tup = (tup,) if isinstance(tup, (str, int)) else tuple(tup)
            if structure is not None:
                tup = tuple(structure.handle(e) if isinstance(e, str) else structure.check(int(e)) for e in tup)
            label = int(label)
            if tup in seen and seen[tup] != label:
                raise ContradictoryLabels(f"tuple {tup} has labels {seen[tup]} and {label}")
            seen[tup] = label
        return cls(tuple(seen.items()))

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def tuples(self) -> list[tuple[int, ...]]:
        return [t for t, _ in self.examples]


@dataclass
class Hypothesis:
    term: S.Expr
    params: tuple[int, ...]
    index_hash: str
    locality_radius: int
    library_term: str = ""
    stats: dict = field(default_factory=dict)

    def to_json(self, structure=None) -> dict:
        params = [structure.name(p) for p in self.params] if structure is not None else list(self.params)
        return {
            "term": to_text(self.term),
            "params": params,
            "index_hash": self.index_hash,
            "locality_radius": self.locality_radius,
            "library_term": self.library_term,
        }

    @classmethod
    def from_json(cls, d: dict, structure=None) -> "Hypothesis":
        params = tuple(structure.handle(p) if isinstance(p, str) else int(p) for p in d["params"]) if structure is not None else tuple(d["params"])
        return cls(parse_term(d["term"]), params, d["index_hash"], int(d["locality_radius"]), d.get("library_term", ""))


@dataclass(frozen=True)
class Reject:
    reason: str


def base_signature(index: IndexArtifact) -> Signature:
    return Signature(tuple((s["name"], s["arity"]) for s in index.meta["base_signature"]))


def _bump(index: IndexArtifact) -> int:
    return 1 if any(a >= 3 for _, a in index.structure.signature) else 0


def _check_index(index: IndexArtifact, cfg: HypothesisClassConfig):
    if index.meta.get("cfg_hash") != cfg.cfg_hash():
        raise StaleIndexError("index was built for a different configuration")


# -- symbolic candidate structure -----------------------------------------

class _Symbolic:
    """Library plus per-term skeletons; independent of the structure."""

    def __init__(self, cfg: HypothesisClassConfig, index: IndexArtifact, registry=None):
        self.cfg = cfg
        self.lib = Library(cfg, base_signature(index), registry)
        self.dec = Decomposer(cfg.rho, cfg.max_graph_vertices)
        self._pattern_skel: dict[int, tuple] = {}
        self.degree = int(index.meta["degree"])
        self._warned = False

    def skeleton(self, t) -> tuple:
        out = ZERO
        for u in t.units:
            if u.pattern is None:
                out = s_add(out, ("c", u.coeff))
            else:
                sk = self._pattern_skel.get(u.pattern)
                if sk is None:
                    sk = self._pattern_skel[u.pattern] = self.dec.count(self.lib.patterns[u.pattern].local)
                out = s_add(out, s_mul(("c", u.coeff), sk))
        return out

    def pieces(self, skel) -> list[Piece]:
        return [self.dec.pieces[k] for k in sorted(s_keys(skel))]

    def slot_bound(self, p: Piece) -> int:
        raw = (self.cfg.ell * _nu(self.degree, p.radius)) ** len(p.bound)
        if raw > INT_CAP:
            if not self._warned:
                warnings.warn(f"constant bound {raw} clamped to 2**127", RuntimeWarning, stacklevel=3)
                self._warned = True
            return INT_CAP
        return raw


def _nu(d, r):
    from .locality import nu

    return nu(d, r)


def _relevant_ys(pieces) -> list[str]:
    ys = set()
    for p in pieces:
        ys |= p.ys
    return sorted(ys, key=lambda v: int(v[1:]))


def _subsets_desc(items: list[str]):
    for size in range(len(items), -1, -1):
        for combo in itertools.combinations(items, size):
            yield frozenset(combo)


# -- candidate space --------------------------------------------------------

class CandidateSpace:
    """Deterministic enumeration of the rewritten candidate terms."""

    def __init__(self, cfg: HypothesisClassConfig, index: IndexArtifact, registry=None, cap: int | None = None):
        _check_index(index, cfg)
        self.sym = _Symbolic(cfg, index, registry)
        self.cap = cap

    def _shapes(self):
        for t in self.sym.lib.terms():
            skel = self.sym.skeleton(t)
            pieces = self.sym.pieces(skel)
            ys = _relevant_ys(pieces)
            for y_in in _subsets_desc(ys):
                slots = [p for p in pieces if p.kind == "y"]
                yield t, skel, pieces, y_in, slots

    def realized_size(self) -> int:
        total = 0
        for _, _, _, _, slots in self._shapes():
            n = 1
            for p in slots:
                n *= self.sym.slot_bound(p) + 1
            total += n
            if self.cap is not None and total > self.cap:
                raise CapOverflow(total, self.cap)
        return total

    def __iter__(self):
        seen = set()
        for t, skel, pieces, y_in, slots in self._shapes():
            ranges = [range(self.sym.slot_bound(p) + 1) for p in slots]
            for values in itertools.product(*ranges):
                vals = {p.key: v for p, v in zip(slots, values)}

                def subst(key, vals=vals, y_in=y_in):
                    p = self.sym.dec.pieces[key]
                    if p.kind == "y":
                        return vals[key]
                    if p.kind == "xy" and not p.ys <= y_in:
                        return 0
                    return p.expr

                term = s_to_expr(skel, subst)
                text = to_text(term)
                if text in seen:
                    continue
                seen.add(text)
                if self.cap is not None and len(seen) > self.cap:
                    raise CapOverflow(len(seen), self.cap)
                yield term


def candidate_terms(cfg, index, registry=None, cap=None) -> CandidateSpace:
    return CandidateSpace(cfg, index, registry, cap)


# -- parameters ---------------------------------------------------------------

def _neighbourhood_radius(cfg: HypothesisClassConfig) -> int:
    return cfg.rho * (cfg.ell + cfg.max_count_vars)


def neighbourhood(oracle: LocalOracle, centers, radius: int) -> list[int]:
    seen = {c: 0 for c in centers}
    frontier = list(dict.fromkeys(centers))
    for depth in range(radius):
        nxt = []
        for v in frontier:
            for w in oracle.neighbors(v):
                if w not in seen:
                    seen[w] = depth + 1
                    nxt.append(w)
        frontier = nxt
    return sorted(seen)


def parameter_candidates(S_: TrainingSet, index: IndexArtifact, cfg: HypothesisClassConfig, oracle=None):
    if cfg.ell == 0:
        return [()]
    oracle = oracle or LocalOracle(index.structure)
    centers = sorted({h for t in S_.tuples for h in t})
    n = neighbourhood(oracle, centers, _neighbourhood_radius(cfg))
    return list(itertools.product(n, repeat=cfg.ell))


# -- learning -----------------------------------------------------------------

class _Region:
    """Materialised neighbourhood of the training tuples with piece evaluation."""

    def __init__(self, oracle: LocalOracle, centers, radius: int):
        local, gmap = materialize(oracle, centers, radius) if centers else (None, {})
        self.local = local
        self.gmap = gmap
        self.kg = kernels.KernelGraph(local) if local is not None else None
        self.ev = PieceEvaluator(self.kg) if local is not None else None

    def value(self, p: Piece, asg: dict) -> int:
        return self.ev.value(p, {v: self.gmap[h] for v, h in asg.items()})


def learn(S_: TrainingSet, index: IndexArtifact, cfg: HypothesisClassConfig, oracle=None, audit=None, registry=None):
    """First consistent (term, parameters) in canonical order, or Reject."""
    _check_index(index, cfg)
    audit = audit if audit is not None else (oracle.audit if oracle is not None else AccessAudit())
    oracle = oracle or LocalOracle(index.structure, audit)
    before = audit.snapshot()["global_scans"]
    for t in S_.tuples:
        if len(t) != cfg.k:
            raise LearnerError(f"training tuple {t} does not have length k={cfg.k}")
    sym = _Symbolic(cfg, index, registry)
    rho = cfg.rho
    m = cfg.max_count_vars
    centers = sorted({h for t in S_.tuples for h in t})
    r_n = _neighbourhood_radius(cfg) if cfg.ell else 0
    region = _Region(oracle, centers, r_n + rho * m + cfg.locality_radius + _bump(index))
    if cfg.ell and centers:
        dist = bfs_distances(region.local.gaifman, [region.gmap[c] for c in centers], r_n)
        inv = {l: g for g, l in region.gmap.items()}
        n_set = sorted(inv[l] for l in dist)
    else:
        n_set = []
    filler = n_set[0] if n_set else 0
    examples = S_.examples
    labels = [lab for _, lab in examples]
    xnames = [f"x{i + 1}" for i in range(cfg.k)]
    ynames = yvars(cfg.ell)
    cache: dict = {}
    checked = 0

    def piece_at(p: Piece, i: int | None, w: tuple):
        asg = {}
        if i is not None:
            asg.update(zip(xnames, examples[i][0]))
        asg.update(zip(ynames, w))
        asg = {v: asg[v] for v in p.free}
        key = (p.key, tuple(sorted(asg.items())))
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = region.value(p, asg)
        return hit

    for t in sym.lib.terms():
        skel = sym.skeleton(t)
        pieces = sym.pieces(skel)
        for p in pieces:
            if p.kind == "ground" and p.key not in index.table:
                raise StaleIndexError(f"lookup table lacks {p.key}")
        ys = _relevant_ys(pieces)
        for y_in in _subsets_desc(ys):
            if y_in and not n_set:
                continue
            inside = [j for j, y in enumerate(ynames) if y in y_in]
            for combo in itertools.product(n_set, repeat=len(inside)):
                w = [filler] * cfg.ell
                for j, v in zip(inside, combo):
                    w[j] = v
                w = tuple(w)
                slots = [p for p in pieces if p.kind == "y" and not p.ys <= y_in]
                checked += 1
                found = _fit(skel, pieces, slots, y_in, w, labels, index, piece_at, sym)
                if found is not None:
                    consts = found

                    def subst(key, consts=consts, y_in=y_in, w=w):
                        p = sym.dec.pieces[key]
                        if p.kind == "y":
                            return consts[key] if key in consts else piece_at(p, None, w)
                        if p.kind == "xy" and not p.ys <= y_in:
                            return 0
                        return p.expr

                    term = s_to_expr(skel, subst)
                    _audit_ok(audit, before)
                    stats = {"candidates_checked": checked, "audit": audit.snapshot(), "neighbourhood": len(n_set)}
                    return Hypothesis(term, w, index.index_hash, cfg.locality_radius, to_text(sym.lib.sigma(t)), stats)
    _audit_ok(audit, before)
    return Reject("no consistent hypothesis in the candidate class")


def _audit_ok(audit: AccessAudit, before: int):
    if audit.snapshot()["global_scans"] != before:
        raise AuditViolation("global scan during the learn phase")


def _fit(skel, pieces, slots, y_in, w, labels, index, piece_at, sym):
    """Slot values making the skeleton reproduce every label, or None."""
    n = len(labels)
    fixed: list[dict] = [dict() for _ in range(n)]
    for p in pieces:
        if p.kind == "ground":
            v = index.table[p.key]
            for i in range(n):
                fixed[i][p.key] = v
        elif p.kind == "x":
            for i in range(n):
                fixed[i][p.key] = piece_at(p, i, w)
        elif p.kind == "xy":
            for i in range(n):
                fixed[i][p.key] = piece_at(p, i, w) if p.ys <= y_in else 0
        elif p.ys <= y_in:
            v = piece_at(p, None, w)
            for i in range(n):
                fixed[i][p.key] = v
    if not slots:
        ok = all(s_eval(skel, fixed[i].__getitem__) == labels[i] for i in range(n))
        return {} if ok else None
    keys = [p.key for p in slots]
    bounds = [sym.slot_bound(p) for p in slots]
    last = keys[-1]
    linear = s_degree(skel, last) <= 1

    def value(i, assign):
        return s_eval(skel, lambda k: assign[k] if k in assign else fixed[i][k])

    head_ranges = [range(b + 1) for b in bounds[:-1]]
    for head in itertools.product(*head_ranges):
        assign = dict(zip(keys[:-1], head))
        if not linear:
            for v in range(bounds[-1] + 1):
                assign[last] = v
                if all(value(i, assign) == labels[i] for i in range(n)):
                    return dict(assign)
            continue
        sol = None
        ok = True
        for i in range(n):
            assign[last] = 0
            a = value(i, assign)
            assign[last] = 1
            b = value(i, assign) - a
            if b == 0:
                if a != labels[i]:
                    ok = False
                    break
                continue
            q, r = divmod(labels[i] - a, b)
            if r or not 0 <= q <= bounds[-1] or (sol is not None and sol != q):
                ok = False
                break
            sol = q
        if ok:
            assign[last] = sol if sol is not None else 0
            return dict(assign)
    return None


# -- hypothesis evaluation -----------------------------------------------------

def evaluate_hypothesis(h: Hypothesis, a, index: IndexArtifact, oracle=None, audit=None) -> int:
    """Value of the hypothesis at ``a`` from the lookup table plus local access."""
    if h.index_hash != index.index_hash:
        raise StaleIndexError("hypothesis was learned against a different index")
    audit = audit if audit is not None else (oracle.audit if oracle is not None else AccessAudit())
    oracle = oracle or LocalOracle(index.structure, audit)
    before = audit.snapshot()["global_scans"]
    a = tuple(oracle.handle(e) if isinstance(e, str) else int(e) for e in a)
    rho = 2 * h.locality_radius + 1
    asg = {f"x{i + 1}": v for i, v in enumerate(a)}
    asg.update({f"y{j + 1}": v for j, v in enumerate(h.params)})
    pieces = {}
    for c in S.count_subterms(h.term):
        pieces[c] = Piece.from_count(c, rho)
    local = [p for p in pieces.values() if p.free]
    region = None
    if local:
        centers = sorted({asg[v] for p in local for v in p.free})
        radius = max(p.radius for p in local) + h.locality_radius + _bump(index)
        region = _Region(oracle, centers, radius)

    def go(n):
        if isinstance(n, S.Int):
            return n.value
        if isinstance(n, S.Add):
            return go(n.left) + go(n.right)
        if isinstance(n, S.Mul):
            return go(n.left) * go(n.right)
        if isinstance(n, S.Count):
            p = pieces[n]
            if not p.free:
                key = to_text(n)
                if key not in index.table:
                    raise StaleIndexError(f"lookup table lacks {key}")
                return index.table[key]
            return region.value(p, {v: asg[v] for v in p.free})
        raise LearnerError(f"unexpected node in hypothesis: {to_text(n)}")

    out = go(h.term)
    _audit_ok(audit, before)
    return out
