"""Hypothesis-class configuration and the explicit term grammar.

Library terms are sums of at most ``max_summands`` units, where a unit is an
integer from I or ``c * #(z1..zj).psi`` with psi a conjunction of literals.
Every term exists in two renderings: over the input signature (templates
spelled out as formulas) and over the expanded signature (templates as
unary or 0-ary predicates).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, field
from functools import cached_property

from . import syntax as S
from .numpred import NumericalPredicateRegistry, builtin_registry
from .parser import parse_formula, to_text
from .relstore import Signature


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HypothesisClassConfig:
    k: int = 1
    ell: int = 0
    q: int = 10**6
    integers: tuple[int, ...] = ()
    max_count_vars: int = 1
    max_literals: int = 3
    max_summands: int = 1
    psi_library: tuple[str, ...] | None = None
    templates: tuple[tuple[str, str], ...] = ()
    radius_cap: int = 2
    quantifier_cap: int = 3
    locality_radius: int = 0
    max_graph_vertices: int = 12
    localise_mode: str = "hanf"
    slope_bound: float = 6.0

    def __post_init__(self):
        object.__setattr__(self, "integers", tuple(sorted(set(int(i) for i in self.integers))))
        if self.psi_library is not None:
            object.__setattr__(self, "psi_library", tuple(self.psi_library))
        object.__setattr__(self, "templates", tuple((str(a), str(b)) for a, b in self.templates))
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.ell < 0 or self.q < 0:
            raise ConfigError("ell and q must be non-negative")
        if self.max_count_vars < 0 or self.max_literals < 1 or self.max_summands < 1:
            raise ConfigError("caps must be positive")
        if self.localise_mode not in ("hanf", "already_local"):
            raise ConfigError(f"unknown localisation mode {self.localise_mode!r}")
        if self.k + self.ell + self.max_count_vars > self.max_graph_vertices:
            raise ConfigError("k + ell + max_count_vars exceeds max_graph_vertices")

    @property
    def rho(self) -> int:
        return 2 * self.locality_radius + 1

    def to_json(self) -> dict:
        d = asdict(self)
        d["templates"] = [list(t) for t in self.templates]
        d["integers"] = list(self.integers)
        if self.psi_library is not None:
            d["psi_library"] = list(self.psi_library)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "HypothesisClassConfig":
        d = dict(d)
        if "templates" in d:
            t = d["templates"]
            if isinstance(t, dict):
                t = list(t.items())
            d["templates"] = tuple(tuple(x) for x in t)
        if d.get("psi_library") is not None:
            d["psi_library"] = tuple(d["psi_library"])
        if "integers" in d:
            d["integers"] = tuple(d["integers"])
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def cfg_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def xvars(k: int) -> list[str]:
    return [f"x{i + 1}" for i in range(k)]


def yvars(ell: int) -> list[str]:
    return [f"y{j + 1}" for j in range(ell)]


def zvars(m: int) -> list[str]:
    return [f"z{i + 1}" for i in range(m)]


def is_x(v: str) -> bool:
    return v.startswith("x") and v[1:].isdigit()


def is_y(v: str) -> bool:
    return v.startswith("y") and v[1:].isdigit()


def is_z(v: str) -> bool:
    return v.startswith("z") and v[1:].isdigit()


def var_key(v: str):
    """Order x's, then y's, then z's, numerically within each group."""
    group = 0 if is_x(v) else 1 if is_y(v) else 2 if is_z(v) else 3
    num = int(v[1:]) if group < 3 else 0
    return (group, num, v)


# -- templates --------------------------------------------------------------

@dataclass(frozen=True)
class Template:
    name: str
    formula: S.Expr
    param: str | None  # the single free variable, None if closed

    @property
    def arity(self) -> int:
        return 0 if self.param is None else 1

    def instantiate(self, var: str | None) -> S.Expr:
        """The template's formula with its parameter renamed to ``var``."""
        body = _alpha(self.formula, self.name.lower() + "_b")
        if self.param is None:
            return body
        return S.rename(body, {self.param: var})


def parse_templates(cfg: HypothesisClassConfig, signature: Signature, registry=None) -> list[Template]:
    out = []
    for name, text in cfg.templates:
        if name in signature:
            raise ConfigError(f"template name {name} clashes with a relation symbol")
        f = parse_formula(text, registry)
        if len(f.free) > 1:
            raise ConfigError(f"template {name} must have at most one free variable")
        param = next(iter(f.free)) if f.free else None
        out.append(Template(name, f, param))
    return out


def _alpha(e: S.Expr, prefix: str) -> S.Expr:
    """Rename all bound variables to fresh names starting with ``prefix``."""
    counter = itertools.count()

    def go(n: S.Expr, env: dict[str, str]) -> S.Expr:
        if isinstance(n, S.Exists):
            new = f"{prefix}{next(counter)}"
            return S.Exists(new, go(n.body, {**env, n.var: new}))
        if isinstance(n, S.Count):
            news = tuple(f"{prefix}{next(counter)}" for _ in n.vars)
            return S.Count(news, go(n.body, {**env, **dict(zip(n.vars, news))}))
        if isinstance(n, S.Atom):
            return S.Atom(n.rel, tuple(env.get(v, v) for v in n.args))
        if isinstance(n, S.Eq):
            return S.Eq(env.get(n.a, n.a), env.get(n.b, n.b))
        if isinstance(n, S.Dist):
            return S.Dist(env.get(n.a, n.a), env.get(n.b, n.b), n.radius)
        if isinstance(n, (S.Truth, S.Int)):
            return n
        if isinstance(n, S.Not):
            return S.Not(go(n.sub, env))
        if isinstance(n, S.Or):
            return S.Or(go(n.left, env), go(n.right, env))
        if isinstance(n, S.Add):
            return S.Add(go(n.left, env), go(n.right, env))
        if isinstance(n, S.Mul):
            return S.Mul(go(n.left, env), go(n.right, env))
        if isinstance(n, S.NumPred):
            return S.NumPred(n.name, tuple(go(t, env) for t in n.args))
        raise S.IllTypedError(repr(n))

    return go(e, {})


# -- pattern library --------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    """#(bound).(literal_1 & ... & literal_p) in the expanded signature."""

    bound: tuple[str, ...]
    literals: tuple[S.Expr, ...]

    @cached_property
    def local(self) -> S.Count:
        return S.Count(self.bound, S.conj(self.literals))

    def sigma(self, templates: dict[str, Template]) -> S.Count:
        lits = [_sigma_literal(l, templates) for l in self.literals]
        return S.Count(self.bound, S.conj(lits))

    @property
    def text(self) -> str:
        return to_text(self.local)


def _sigma_literal(lit: S.Expr, templates: dict[str, Template]) -> S.Expr:
    neg = isinstance(lit, S.Not)
    node = lit.sub if neg else lit
    if isinstance(node, S.Atom) and node.rel in templates:
        t = templates[node.rel]
        node = t.instantiate(node.args[0] if node.args else None)
    return S.Not(node) if neg else node


def _atoms_for(signature: Signature, templates: list[Template], vs: list[str], bound: list[str]) -> list[S.Expr]:
    atoms: list[S.Expr] = []
    bset = set(bound)
    for rel, arity in signature:
        if arity == 0:
            continue
        for args in itertools.product(vs, repeat=arity):
            if bset & set(args):
                atoms.append(S.Atom(rel, args))
    for t in templates:
        if t.arity == 1:
            atoms.extend(S.Atom(t.name, (z,)) for z in bound)
        else:
            atoms.append(S.Atom(t.name, ()))
    for i, a in enumerate(vs):
        for b in vs[i + 1 :]:
            if a in bset or b in bset:
                atoms.append(S.Eq(a, b))
    return atoms


def generated_patterns(cfg: HypothesisClassConfig, signature: Signature, templates: list[Template]) -> list[Pattern]:
    out: list[Pattern] = []
    free = xvars(cfg.k) + yvars(cfg.ell)
    for j in range(1, cfg.max_count_vars + 1):
        bound = zvars(j)
        atoms = _atoms_for(signature, templates, free + bound, bound)
        lits = [a for a in atoms] + [S.Not(a) for a in atoms]
        for size in range(1, cfg.max_literals + 1):
            for combo in itertools.combinations(range(len(lits)), size):
                chosen = [lits[i] for i in combo]
                base = {i % len(atoms) for i in combo}
                if len(base) != len(combo):
                    continue  # an atom and its negation, or a repeat
                positives = [l for l in chosen if not isinstance(l, S.Not)]
                covered = set().union(*(l.free for l in positives)) if positives else set()
                if not set(bound) <= covered:
                    continue
                out.append(Pattern(tuple(bound), tuple(chosen)))
    return out


def explicit_patterns(cfg: HypothesisClassConfig, registry=None) -> list[Pattern]:
    out = []
    for text in cfg.psi_library or ():
        f = parse_formula(text, registry)
        lits = S.conjuncts(f)
        for l in lits:
            if not S.is_literal(l):
                raise ConfigError(f"library formula {text!r} is not a conjunction of literals")
        bound = sorted((v for v in f.free if is_z(v)), key=var_key)
        others = [v for v in f.free if not is_z(v)]
        allowed = set(xvars(cfg.k) + yvars(cfg.ell))
        if set(others) - allowed:
            raise ConfigError(f"library formula {text!r} uses variables outside x1..xk, y1..yl, z*")
        if len(bound) > cfg.max_count_vars:
            raise ConfigError(f"library formula {text!r} has more than max_count_vars bound variables")
        out.append(Pattern(tuple(bound), tuple(lits)))
    return out


# -- library terms ----------------------------------------------------------

@dataclass(frozen=True)
class Unit:
    coeff: int
    pattern: int | None  # index into the pattern list; None for a constant

    def local(self, patterns: list[Pattern]) -> S.Expr:
        if self.pattern is None:
            return S.Int(self.coeff)
        g = patterns[self.pattern].local
        return g if self.coeff == 1 else S.Mul(S.Int(self.coeff), g)

    def sigma(self, patterns: list[Pattern], templates: dict[str, Template]) -> S.Expr:
        if self.pattern is None:
            return S.Int(self.coeff)
        g = patterns[self.pattern].sigma(templates)
        return g if self.coeff == 1 else S.Mul(S.Int(self.coeff), g)


@dataclass(frozen=True)
class LibTerm:
    units: tuple[Unit, ...]
    position: tuple[int, ...]


class Library:
    """Deterministically ordered library terms over a fixed pattern list."""

    def __init__(self, cfg: HypothesisClassConfig, signature: Signature, registry: NumericalPredicateRegistry | None = None):
        self.cfg = cfg
        self.signature = signature
        self.registry = registry or builtin_registry()
        self.templates = parse_templates(cfg, signature, self.registry)
        self.template_map = {t.name: t for t in self.templates}
        if cfg.psi_library is not None:
            self.patterns = explicit_patterns(cfg, self.registry)
        else:
            self.patterns = generated_patterns(cfg, signature, self.templates)
        units = [Unit(c, None) for c in cfg.integers]
        for i in range(len(self.patterns)):
            units.append(Unit(1, i))
            for c in cfg.integers:
                if c not in (0, 1):
                    units.append(Unit(c, i))
        self.units = units

    def expanded_signature(self) -> Signature:
        return self.signature.extend((t.name, t.arity) for t in self.templates)

    def terms(self):
        """Yield library terms: by number of summands, then lexicographic."""
        for n in range(1, self.cfg.max_summands + 1):
            for combo in itertools.combinations(range(len(self.units)), n):
                units = tuple(self.units[i] for i in combo)
                if sum(1 for u in units if u.pattern is None) > 1:
                    continue
                t = LibTerm(units, combo)
                if self.sigma(t).size > self.cfg.q:
                    continue
                yield t

    def local(self, t: LibTerm) -> S.Expr:
        return S.total(u.local(self.patterns) for u in t.units)

    def sigma(self, t: LibTerm) -> S.Expr:
        return S.total(u.sigma(self.patterns, self.template_map) for u in t.units)

    def count_terms(self) -> int:
        return sum(1 for _ in self.terms())
