import pytest

from foclearn import syntax as S
from foclearn.evaluator import (
    LocalityDiscrepancy,
    UnassignedVariableError,
    assert_local,
    eval_local,
    evaluate,
)
from foclearn.parser import parse
from foclearn.relstore import LocalOracle, Signature, Structure

from conftest import EXAMPLE1


def test_citation_count(citations):
    t = parse(EXAMPLE1)
    assert evaluate(t, citations, {"x": "a1"}) == 3
    assert evaluate(t, citations, {"x": "a2"}) == 0


def test_numpred_false(citations):
    e = parse("Pleq(3, #(z1).Author(x,z1))")
    assert evaluate(e, citations, {"x": "a1"}) is False
    assert evaluate(parse("Pleq(2, #(z1).Author(x,z1))"), citations, {"x": "a1"}) is True


def test_nullary_count(citations):
    assert evaluate(S.Count((), S.Truth(True)), citations) == 1
    assert evaluate(S.Count((), S.Truth(False)), citations) == 0


def test_arithmetic_and_unassigned(citations):
    assert evaluate(parse("3 - 5 * 2"), citations) == -7
    with pytest.raises(UnassignedVariableError):
        evaluate(parse(EXAMPLE1), citations, {})


def test_eval_local_matches(citations):
    t = parse(EXAMPLE1)
    o = LocalOracle(citations)
    assert eval_local(t, {"x": "a1"}, 2, o) == 3
    assert assert_local(t, citations, {"x": "a1"}, 2) == 3


def test_discrepancy_detected():
    s = Structure(Signature.of(E=2), "abc", {"E": [("a", "b")]})
    t = parse("#(y).(y = y)")
    with pytest.raises(LocalityDiscrepancy):
        assert_local(S.Add(t, S.Count(("w",), S.Eq("x", "w"))), s, {"x": "a"}, 1)


def test_dist_semantics():
    s = Structure(Signature.of(E=2), "abcd", {"E": [("a", "b"), ("b", "c")]})
    f = S.Dist("x", "y", 1)
    assert evaluate(f, s, {"x": "a", "y": "b"})
    assert not evaluate(f, s, {"x": "a", "y": "c"})
    assert evaluate(S.Dist("x", "y", 2), s, {"x": "a", "y": "c"})
    assert not evaluate(S.Dist("x", "y", 5), s, {"x": "a", "y": "d"})
