"""Surface syntax for FOC1: a recursive-descent parser and a printer.

Formulas::

    formula := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | ('exists' | 'forall') VAR '.' unary | primary
    primary := '(' formula ')' | 'true' | 'false'
             | 'dist' '(' VAR ',' VAR ')' '<=' INT
             | REL '(' [VAR (',' VAR)*] ')'
             | PRED '(' term (',' term)* ')'
             | VAR '=' VAR | VAR '!=' VAR

Terms::

    term  := prod (('+' | '-') prod)*
    prod  := tunary ('*' tunary)*
    tunary:= INT | '-' tunary | '(' term ')'
           | '#' '(' [VAR (',' VAR)*] ')' '.' unary

Quantifier and counting bodies bind as tightly as negation; wrap compound
bodies in parentheses. A name applied to arguments is a numerical predicate
when the registry knows it and a relation otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as S
from .numpred import NumericalPredicateRegistry, builtin_registry

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><=|!=|[#(),.&|!=+*-]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.msg = message
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            if text[i:].strip() == "":
                break
            j = i
            while j < n and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", j, text)
        kind = m.lastgroup
        if kind is None:
            break
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        i = m.end()
    toks.append(_Tok("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, registry: NumericalPredicateRegistry):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.reg = registry

    # helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", tok.pos, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.kind != "int" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def var(self) -> str:
        t = self.tok
        if t.kind != "ident" or not S.VAR_RE.match(t.text) or t.text in S.KEYWORDS:
            self.error("expected a variable")
        self.i += 1
        return t.text

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.error("expected an integer")
        self.i += 1
        return int(t.text)

    def wrap(self, fn, *args):
        tok = self.tok
        try:
            return fn(*args)
        except S.SyntaxRuleError as exc:
            raise ParseError(str(exc), tok.pos, self.text) from None

    def finish(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")

    # formulas
    def formula(self) -> S.Expr:
        left = self.conj()
        while self.accept("|"):
            left = S.Or(left, self.conj())
        return left

    def conj(self) -> S.Expr:
        left = self.unary()
        while self.accept("&"):
            left = S.And(left, self.unary())
        return left

    def unary(self) -> S.Expr:
        if self.accept("!"):
            return S.Not(self.unary())
        t = self.tok
        if t.kind == "ident" and t.text in ("exists", "forall"):
            self.i += 1
            v = self.var()
            self.expect(".")
            body = self.unary()
            return S.Exists(v, body) if t.text == "exists" else S.Forall(v, body)
        return self.primary()

    def primary(self) -> S.Expr:
        t = self.tok
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if t.kind != "ident":
            self.error("expected a formula")
        if t.text in ("true", "false"):
            self.i += 1
            return S.Truth(t.text == "true")
        if t.text == "dist":
            self.i += 1
            self.expect("(")
            a = self.var()
            self.expect(",")
            b = self.var()
            self.expect(")")
            self.expect("<=")
            return S.Dist(a, b, self.integer())
        if self.peek().text == "(" and self.peek().kind == "op":
            name = t.text
            self.i += 2
            if name in self.reg:
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                arity = self.reg.get(name).arity
                if len(args) != arity:
                    raise ParseError(f"{name} expects {arity} arguments", t.pos, self.text)
                return self.wrap(S.NumPred, name, tuple(args))
            args = []
            if not self.accept(")"):
                args.append(self.var())
                while self.accept(","):
                    args.append(self.var())
                self.expect(")")
            return self.wrap(S.Atom, name, tuple(args))
        a = self.var()
        if self.accept("="):
            return S.Eq(a, self.var())
        if self.accept("!="):
            return S.Not(S.Eq(a, self.var()))
        self.error("expected '=' after variable")

    # terms
    def term(self) -> S.Expr:
        left = self.prod()
        while True:
            if self.accept("+"):
                left = S.Add(left, self.prod())
            elif self.accept("-"):
                left = S.Sub(left, self.prod())
            else:
                return left

    def prod(self) -> S.Expr:
        left = self.tunary()
        while self.accept("*"):
            left = S.Mul(left, self.tunary())
        return left

    def tunary(self) -> S.Expr:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return S.Int(int(t.text))
        if self.accept("-"):
            if self.tok.kind == "int":
                return S.Int(-self.integer())
            return S.Mul(S.Int(-1), self.tunary())
        if self.accept("("):
            e = self.term()
            self.expect(")")
            return e
        if self.accept("#"):
            self.expect("(")
            vs: list[str] = []
            if not self.accept(")"):
                vs.append(self.var())
                while self.accept(","):
                    vs.append(self.var())
                self.expect(")")
            self.expect(".")
            body = self.unary()
            return self.wrap(S.Count, tuple(vs), body)
        self.error("expected a term")


def parse_formula(text: str, registry: NumericalPredicateRegistry | None = None) -> S.Expr:
    p = _Parser(text, registry or builtin_registry())
    f = p.formula()
    p.finish()
    return f


def parse_term(text: str, registry: NumericalPredicateRegistry | None = None) -> S.Expr:
    p = _Parser(text, registry or builtin_registry())
    t = p.term()
    p.finish()
    return t


def parse(text: str, registry: NumericalPredicateRegistry | None = None) -> S.Expr:
    """Parse a formula or a term, whichever the text is."""
    registry = registry or builtin_registry()
    errors = []
    for fn in (parse_formula, parse_term):
        try:
            return fn(text, registry)
        except ParseError as exc:
            errors.append(exc)
    raise max(errors, key=lambda e: e.pos)


# -- printing ---------------------------------------------------------------

def to_text(e: S.Expr) -> str:
    return _fmt(e)


def _and_chain(e: S.Expr) -> list[S.Expr]:
    pair = S.as_and(e)
    if pair is None:
        return [e]
    return _and_chain(pair[0]) + [pair[1]]


def _fmt(e: S.Expr) -> str:
    if isinstance(e, S.Eq):
        return f"({e.a} = {e.b})"
    if isinstance(e, S.Atom):
        return f"{e.rel}({','.join(e.args)})"
    if isinstance(e, S.Truth):
        return "true" if e.value else "false"
    if isinstance(e, S.Dist):
        return f"dist({e.a},{e.b}) <= {e.radius}"
    if isinstance(e, S.Not):
        if S.as_and(e) is not None:
            return "(" + " & ".join(_fmt(p) for p in _and_chain(e)) + ")"
        fa = S.as_forall(e)
        if fa is not None:
            return f"(forall {fa[0]}. {_fmt(fa[1])})"
        return "!" + _fmt(e.sub)
    if isinstance(e, S.Or):
        parts = []
        node = e
        while isinstance(node, S.Or):
            parts.append(node.right)
            node = node.left
        parts.append(node)
        return "(" + " | ".join(_fmt(p) for p in reversed(parts)) + ")"
    if isinstance(e, S.Exists):
        return f"(exists {e.var}. {_fmt(e.body)})"
    if isinstance(e, S.NumPred):
        return f"{e.name}(" + ", ".join(_fmt(t) for t in e.args) + ")"
    if isinstance(e, S.Count):
        return f"#({','.join(e.vars)})." + _fmt(e.body)
    if isinstance(e, S.Int):
        return str(e.value)
    if isinstance(e, S.Add):
        items = []
        node = e
        while isinstance(node, S.Add):
            sub = S.as_sub(node)
            if sub is not None:
                items.append(("-", sub[1]))
            else:
                items.append(("+", node.right))
            node = node.left
        out = _fmt(node)
        for op, t in reversed(items):
            out += f" {op} {_fmt(t)}"
        return f"({out})"
    if isinstance(e, S.Mul):
        parts = []
        node = e
        while isinstance(node, S.Mul):
            parts.append(node.right)
            node = node.left
        parts.append(node)
        return "(" + " * ".join(_fmt(p) for p in reversed(parts)) + ")"
    raise S.IllTypedError(f"cannot print {e!r}")
