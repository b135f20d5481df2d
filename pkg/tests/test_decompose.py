import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn import syntax as S
from foclearn.decompose import (
    Decomposer,
    FragmentError,
    Piece,
    PieceEvaluator,
    component_split,
    constant_bound,
    decompose_term,
    fv_decompose,
    s_eval,
    tuple_eq_in_set,
)
from foclearn.evaluator import evaluate
from foclearn.kernels import KernelGraph
from foclearn.parser import parse
from foclearn.relstore import Signature, Structure
from foclearn.synth import random_structure

SIG = Signature.of(E=2, Red=1)


def e(a, b):
    return frozenset((a, b))


def test_component_split_examples():
    assert component_split((1, 2, 3), {e(1, 2)}) == ((1, 2), (3,), frozenset({e(1, 2)}), frozenset())
    c1, c2, e1, e2 = component_split("abcd", {e("a", "c"), e("b", "d")})
    assert (c1, c2) == (("a", "c"), ("b", "d"))
    assert e1 == {e("a", "c")} and e2 == {e("b", "d")}
    assert component_split((7,), set()) == ((7,), (), frozenset(), frozenset())
    with pytest.raises(ValueError):
        component_split((), set())


def test_tuple_eq_in_set_examples():
    assert tuple_eq_in_set((1, 2), (1, 3), {1})
    assert not tuple_eq_in_set((1, 2), (1, 3), {2})
    assert tuple_eq_in_set((), (), {1})
    # only w's entries are tested for membership
    assert tuple_eq_in_set((5, 2), (1, 2), {2})
    assert not tuple_eq_in_set((1, 2), (5, 2), {1})
    with pytest.raises(ValueError):
        tuple_eq_in_set((1,), (1, 2), {1})


def test_fv_decompose_disjunction():
    a1 = S.Atom("Red", ("x",))
    a2 = S.Atom("Red", ("y",))
    d = fv_decompose(S.Or(a1, a2), {"x"}, {"y"})
    assert set(d.pairs) == {(a1, S.TRUE), (S.Not(a1), a2)}


def test_fv_decompose_rejects_mixed():
    with pytest.raises(FragmentError):
        fv_decompose(S.Atom("E", ("x", "y")), {"x"}, {"y"})
    with pytest.raises(ValueError):
        fv_decompose(S.TRUE, {"x"}, {"x"})


BLOCKS = [
    S.Atom("Red", ("x",)),
    S.Atom("E", ("x", "x")),
    S.Atom("Red", ("y",)),
    S.Atom("E", ("y", "y")),
    S.Exists("w", S.Atom("E", ("x", "w"))),
]


def _random_bool(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(BLOCKS)
    op = rng.randrange(3)
    if op == 0:
        return S.Not(_random_bool(rng, depth - 1))
    if op == 1:
        return S.Or(_random_bool(rng, depth - 1), _random_bool(rng, depth - 1))
    return S.And(_random_bool(rng, depth - 1), _random_bool(rng, depth - 1))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_fv_decompose_random_separable(seed):
    rng = random.Random(seed)
    phi = _random_bool(rng, 3)
    d = fv_decompose(phi, {"x"}, {"y"})
    s = random_structure(SIG, rng.randint(1, 4), rng, density=0.5)
    for a, b in itertools.product(range(s.size), repeat=2):
        asg = {"x": a, "y": b}
        got = d.holds(lambda f: evaluate(f, s, asg), lambda f: evaluate(f, s, asg))
        assert got == evaluate(phi, s, asg)


def test_piece_from_count():
    c = parse("#(z1).(E(x1,z1) & dist(x1,z1) <= 1)")
    p = Piece.from_count(c, 1)
    assert p.kind == "x" and p.radius == 1
    with pytest.raises(FragmentError):
        Piece.from_count(parse("#(z1).(E(x1,z1) & !(dist(x1,z1) <= 1))"), 1)
    with pytest.raises(FragmentError):
        Piece.from_count(parse("#(z1).E(x1,z1)"), 1)


COUNTS = [
    "#(z1).(E(x1,z1) & Red(z1))",
    "#(z1).(Red(z1) & !E(x1,z1))",
    "#(z1).(E(z1,y1) & !Red(x1))",
    "#(z1,z2).(E(x1,z1) & Red(z2))",
    "#(z1).(Red(z1) | E(y1,z1))",
    "#(z1).(x1 = y1)",
    "#(z1,z2).(E(z1,z2) & !(z1 = z2))",
    # several single-side literals per half once the graph splits
    "#(z1,z2).(Red(x1) & !Red(y1) & Red(z2) & !E(z1,z1) & E(y1,z1))",
    "#(z1).(!(Red(y1) | !Red(z1)) & E(x1,z1))",
]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(COUNTS))
def test_sum_identity(seed, text):
    rng = random.Random(seed)
    s = random_structure(SIG, rng.randint(1, 6), rng, density=0.5)
    c = parse(text)
    dec = Decomposer(1)
    total, graphs = dec.count(c, per_graph=True)
    ev = PieceEvaluator(KernelGraph(s))
    free = sorted(c.free)
    for vals in itertools.product(range(s.size), repeat=len(free)):
        asg = dict(zip(free, vals))
        value = lambda key: ev.value(dec.pieces[key], asg)
        assert s_eval(total, value) == evaluate(c, s, asg)
        assert sum(s_eval(g, value) for g in graphs.values()) == evaluate(c, s, asg)


def test_decompose_term_cases():
    rng = random.Random(5)
    t = parse("#(z1).(E(x1,z1) & Red(z1)) + 2 * #(z1).(E(z1,y1) & Red(x1))")
    for _ in range(20):
        s = random_structure(SIG, rng.randint(2, 7), rng, density=0.4)
        tuples = [(rng.randrange(s.size),)]
        w = (rng.randrange(s.size),)
        res = decompose_term(t, s, tuples, w)
        assert res.bound == constant_bound(1, s.gaifman.degree, 1, 1)
        assert res.trace_json().startswith("{")
        for (v,) in tuples:
            for w2 in range(s.size):
                if not tuple_eq_in_set(w, (w2,), res.neighbourhood):
                    continue
                asg = {"x1": v, "y1": w2}
                got = evaluate(res.term, s, asg) if res.term.free else evaluate(res.term, s)
                assert got == evaluate(t, s, {"x1": v, "y1": w[0]})


def test_decompose_term_far_parameter_is_constant():
    # y1 far from every training tuple: the y-only piece becomes an integer
    s = Structure(SIG, ["a", "b", "c", "d", "f"], {"E": [("a", "b"), ("d", "f")], "Red": [("f",)]})
    t = parse("#(z1).(E(y1,z1) & Red(z1))")
    res = decompose_term(t, s, [(0,)], (3,))
    assert res.term == S.Int(1)
    assert res.constants == [1]


def test_too_many_vertices():
    dec = Decomposer(1, max_vertices=2)
    with pytest.raises(FragmentError):
        dec.count(parse("#(z1,z2).(E(x1,z1) & E(z1,z2))"))
