import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn import syntax as S
from foclearn.parser import ParseError, parse, parse_formula, parse_term, to_text
from foclearn.relstore import Signature
from foclearn.synth import random_expression


def test_sizes():
    assert S.Eq("x", "y").size == 3
    assert S.Atom("R", ("x", "y")).size == 6
    assert S.Atom("Z", ()).size == 3
    assert S.Not(S.Eq("x", "y")).size == 4
    assert S.Or(S.Eq("x", "y"), S.Eq("x", "x")).size == 9
    assert S.Exists("y", S.Eq("x", "y")).size == 5
    assert S.Count(("z1", "z2"), S.Truth(True)).size == 4 + 3 + 1
    assert S.Count((), S.Truth(True)).size == 5
    assert S.Add(S.Int(1), S.Int(2)).size == 5


def test_free_variables():
    e = parse("#(z1,z2).(Author(x,z1) & Citation(z2,z1))")
    assert e.free == {"x"}
    assert parse("exists y. E(x,y)").free == {"x"}
    assert parse("#(y).(E(x,y) | E(y,w))").free == {"x", "w"}


def test_numpred_rejects_two_free_vars():
    with pytest.raises(S.SyntaxRuleError):
        S.NumPred("Pleq", (parse("#(z).E(x,z)"), parse("#(z).E(y,z)")))
    with pytest.raises(ParseError):
        parse("Pleq(#(z).E(x,z), #(z).E(y,z))")
    e = parse("Pleq(#(z).E(x,z), 2)")
    assert e.free == {"x"}


def test_sugar_shapes():
    a, b = S.Eq("x", "y"), S.Eq("y", "y")
    assert S.as_and(S.And(a, b)) == (a, b)
    assert S.as_forall(S.Forall("y", a)) == ("y", a)
    assert S.as_sub(S.Sub(S.Int(3), S.Int(1))) == (S.Int(3), S.Int(1))


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("E(x,")
    with pytest.raises(ParseError):
        parse_formula("#(z).E(x,z)")
    with pytest.raises(ParseError):
        parse_term("E(x,y)")


def test_example_roundtrip():
    text = "#(z1,z2).(Author(x,z1) & Citation(z2,z1))"
    assert parse(to_text(parse(text))) == parse(text)


SIG = Signature.of(E=2, R=1, Z=0)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 12))
def test_print_parse_roundtrip(seed, budget):
    e = random_expression(SIG, random.Random(seed), budget=budget)
    back = parse(to_text(e))
    assert back == e
    assert back.size == e.size and back.free == e.free
