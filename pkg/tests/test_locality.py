import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn import syntax as S
from foclearn.evaluator import evaluate
from foclearn.locality import (
    AlreadyLocal,
    ComponentPattern,
    Hanf,
    LocalisationError,
    UnsupportedFragment,
    all_patterns,
    delta_formula,
    dist_formula,
    local_radius,
    localise,
    neighbourhood_type,
    nu,
)
from foclearn.parser import parse
from foclearn.relstore import Signature, Structure
from foclearn.synth import random_structure

GRAPH = Signature.of(E=2, Red=1)


def test_nu_values():
    assert nu(3, 0) == 1
    assert nu(3, 1) == 4
    assert nu(3, 2) == 10
    assert nu(2, 3) == 7
    assert nu(1, 5) == 2
    assert nu(0, 4) == 1


def test_delta_examples(citations):
    a1, p2, a2 = citations.handles(["a1", "p2", "a2"])
    joined = delta_formula(ComponentPattern(2, frozenset({(0, 1)}), 1))
    apart = delta_formula(ComponentPattern(2, frozenset(), 1))
    assert evaluate(joined, citations, {"x1": a1, "x2": p2})
    assert not evaluate(apart, citations, {"x1": a1, "x2": p2})
    # a1 and a2 are 3 apart
    assert evaluate(apart, citations, {"x1": a1, "x2": a2})
    assert delta_formula(ComponentPattern(1, frozenset(), 4)) == S.Truth(True)


def test_pattern_validation():
    with pytest.raises(ValueError):
        ComponentPattern(2, frozenset({(0, 0)}), 1)
    assert sum(1 for _ in all_patterns(3, 0)) == 8
    assert ComponentPattern(3, frozenset({(0, 1), (1, 2)}), 0).connected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 4))
def test_dist_formula_matches_dist(seed, r):
    rng = random.Random(seed)
    s = random_structure(GRAPH, rng.randint(1, 6), rng, density=0.4)
    f = dist_formula(r, GRAPH)
    assert f.free == {"x", "y"}
    for a, b in itertools.product(range(s.size), repeat=2):
        asg = {"x": a, "y": b}
        assert evaluate(f, s, asg) == evaluate(S.Dist("x", "y", r), s, asg)


def test_local_radius_cases():
    assert local_radius(parse("E(x,y)"), GRAPH) == 0
    assert local_radius(parse("exists y. (E(x,y) & Red(y))"), GRAPH) == 1
    assert local_radius(parse("exists y. exists w. (E(x,y) & E(y,w) & Red(w))"), GRAPH) == 2
    assert local_radius(parse("exists y. Red(y)"), GRAPH) is None
    assert local_radius(parse("#(z1,z2).(Author(x,z1) & Citation(z2,z1))"), Signature.of(Author=2, Citation=2)) == 2


def _iso_relabel(s, rng):
    perm = list(range(s.size))
    rng.shuffle(perm)
    names = [s.name(perm.index(i)) for i in range(s.size)]
    rels = {rel: [tuple(s.name(h) for h in t) for t in s.relation(rel)] for rel, _ in s.signature}
    return Structure(s.signature, names, rels)


def test_neighbourhood_type_invariant():
    rng = random.Random(3)
    for _ in range(30):
        s = random_structure(GRAPH, rng.randint(1, 7), rng, density=0.4)
        t = _iso_relabel(s, rng)
        for v in range(s.size):
            w = t.handle(s.name(v))
            assert neighbourhood_type(s, v, 1) == neighbourhood_type(t, w, 1)


def test_localise_example():
    s = Structure(GRAPH, "abcd", {"E": [("a", "b"), ("c", "d")], "Red": [("b",)]})
    phi = parse("exists y. (E(x,y) & Red(y))")
    out = localise(phi, s, Hanf())
    assert out.radius == 1
    assert out.structure.restrict(s.signature) == s
    for v in range(s.size):
        assert evaluate(out.formula, out.structure, {"x": v}) == evaluate(phi, s, {"x": v})
    assert '"mode": "hanf"' in out.report_json()


def test_localise_closed_subformula():
    s = Structure(GRAPH, "abc", {"E": [("a", "b")], "Red": [("c",)]})
    phi = parse("E(x,x) | exists y. Red(y)")
    out = localise(phi, s, Hanf())
    assert out.added and out.added[0][1] == 0
    assert all(evaluate(out.formula, out.structure, {"x": v}) for v in range(3))


def test_per_type_mode_equivalent():
    rng = random.Random(11)
    phi = parse("exists y. (E(x,y) & !Red(y))")
    for _ in range(20):
        s = random_structure(GRAPH, rng.randint(1, 6), rng, density=0.5)
        out = localise(phi, s, Hanf(per_type=True))
        for v in range(s.size):
            assert evaluate(out.formula, out.structure, {"x": v}) == evaluate(phi, s, {"x": v})


def test_unsupported_fragment():
    s = Structure(GRAPH, "ab", {})
    with pytest.raises(UnsupportedFragment, match="already_local"):
        localise(parse("exists a. exists b. exists c. exists w. E(x,w)"), s, Hanf(quantifier_cap=3))


def test_already_local_failure():
    s = Structure(GRAPH, "abc", {"E": [("a", "b")], "Red": [("c",)]})
    with pytest.raises(LocalisationError, match="sampling check failed"):
        localise(parse("#(y).Red(y)"), s, AlreadyLocal(1))
    ok = localise(parse("#(y).(E(x,y) & Red(y))"), s, AlreadyLocal(1))
    assert ok.radius == 1 and ok.structure is s


FORMULAS = [
    "exists y. (E(x,y) & Red(y))",
    "!(exists y. (E(y,x) & !Red(y)))",
    "exists y. (E(x,y) & exists w. (E(y,w) & Red(w) & !(w = x)))",
    "Red(x) | exists y. (E(x,y) & E(y,x))",
    "exists y. (dist(x,y) <= 2 & Red(y) & !E(x,y))",
    "(exists y. Red(y)) & !Red(x)",
]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(FORMULAS))
def test_hanf_equivalent_on_small_graphs(seed, text):
    rng = random.Random(seed)
    s = random_structure(GRAPH, rng.randint(1, 6), rng, density=0.5)
    phi = parse(text)
    out = localise(phi, s, Hanf())
    assert out.structure.restrict(s.signature) == s
    assert S.is_quantifier_free(out.formula) or local_radius(out.formula, out.signature) is not None
    for v in range(s.size):
        assert evaluate(out.formula, out.structure, {"x": v}) == evaluate(phi, s, {"x": v})
