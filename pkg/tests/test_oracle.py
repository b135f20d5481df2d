import random

from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn import syntax as S
from foclearn.evaluator import evaluate
from foclearn.oracle import naive_components, naive_eval
from foclearn.relstore import Signature, Structure
from foclearn.synth import random_expression, random_structure

SIG = Signature.of(E=2, R=1)


def test_empty_universe():
    s = Structure(SIG, [], {})
    assert naive_eval(S.Count(("z",), S.Truth(True)), s) == 0
    assert evaluate(S.Count(("z",), S.Truth(True)), s) == 0
    assert naive_eval(S.Exists("z", S.Truth(True)), s) is False


def test_components_example():
    s = Structure(SIG, "abc", {"E": [("a", "b")]})
    assert naive_components(s, ["a", "b", "c"], 0) == [[0, 1], [2]]
    assert naive_components(s, ["a", "c"], 1) == [[0], [1]]
    assert naive_components(s, ["c", "c"], 0) == [[0, 1]]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_naive_matches_evaluator(seed):
    rng = random.Random(seed)
    s = random_structure(SIG, rng.randint(0, 5), rng)
    e = random_expression(SIG, rng, budget=8)
    asg = {v: rng.randrange(s.size) for v in e.free} if s.size else {}
    if e.free and not s.size:
        return
    assert naive_eval(e, s, asg) == evaluate(e, s, asg)
