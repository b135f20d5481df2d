import io
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn.relstore import (
    INFINITY,
    AccessAudit,
    ArityMismatchError,
    FormatError,
    LocalOracle,
    Signature,
    Structure,
    UnknownSymbolError,
    ball,
    distance,
    dumps,
    ingest,
    ingest_text,
    induced_neighborhood,
    materialize,
    persist,
)


def path_abc():
    return Structure(Signature.of(E=2), "abc", {"E": [("a", "b"), ("b", "c")]})


def test_gaifman_single_tuple():
    s = Structure(Signature.of(Author=2), ["a1", "p1"], {"Author": [("a1", "p1")]})
    g = s.gaifman
    assert g.edges() == {frozenset({0, 1})}
    assert g.degree == 1


def test_gaifman_unary_only():
    s = Structure(Signature.of(R=1), "abc", {"R": [("a",), ("b",)]})
    assert s.gaifman.degree == 0
    assert s.gaifman.edges() == set()


def test_citations_degree(citations):
    g = citations.gaifman
    assert g.degree == 3
    p1 = citations.handle("p1")
    assert {citations.name(v) for v in g.neighbors(p1)} == {"a1", "p2", "p3"}


def test_distance_cases():
    s = path_abc()
    g = s.gaifman
    a, b, c = s.handles("abc")
    assert distance(g, a, a) == 0
    assert distance(g, a, c) == 2
    t = Structure(Signature.of(E=2), "abcd", {"E": [("a", "b"), ("c", "d")]})
    assert distance(t.gaifman, 0, 3) == INFINITY


def test_ball_cases(citations):
    s = path_abc()
    assert ball(s.gaifman, (0, 2), 0) == {0, 2}
    assert ball(s.gaifman, (0,), 1) == {0, 1}
    got = ball(citations.gaifman, (citations.handle("a1"),), 1)
    assert {citations.name(v) for v in got} == {"a1", "p1", "p2"}
    assert ball(s.gaifman, (), 3) == frozenset()


def test_induced_neighborhood(citations):
    s = path_abc()
    assert induced_neighborhood(s, (0,), 5) == s
    t = Structure(Signature.of(E=2, R=1), "ab", {"E": [("a", "b")], "R": [("a",)]})
    n0 = induced_neighborhood(t, (0,), 0)
    assert n0.names == ("a",)
    assert n0.relation("R") == {(0,)} and n0.relation("E") == frozenset()
    n1 = induced_neighborhood(citations, (citations.handle("a2"),), 1)
    assert set(n1.names) == {"a2", "p3"}
    assert n1.named_relations() == {"Author": {("a2", "p3")}, "Citation": set()}


def test_oracle_counts(citations):
    audit = AccessAudit()
    o = LocalOracle(citations, audit)
    assert o.member("Author", (citations.handle("a1"), citations.handle("p1")))
    assert audit.membership_queries == 1
    assert {o.name(v) for v in o.neighbors(citations.handle("a2"))} == {"p3"}
    assert audit.neighbor_queries == 1
    assert audit.global_scans == 0
    o.universe()
    assert audit.global_scans == 1


def test_ingest_fixture(citations):
    assert citations.size == 5
    assert len(citations.relation("Author")) == 3
    assert len(citations.relation("Citation")) == 3


def test_ingest_empty_relations():
    s = ingest_text('{"signature": [{"name": "R", "arity": 2}], "universe": ["a"]}\n')
    assert s.relation("R") == frozenset()
    assert s.size == 1


def test_ingest_errors():
    head = '{"signature": [{"name": "R", "arity": 2}]}\n'
    with pytest.raises(ArityMismatchError, match="R"):
        ingest_text(head + '{"rel": "R", "tuple": ["a"]}\n')
    with pytest.raises(UnknownSymbolError):
        ingest_text(head + '{"rel": "S", "tuple": ["a", "b"]}\n')
    with pytest.raises(FormatError) as err:
        ingest_text(head + "{not json\n")
    assert err.value.line == 2


def test_persist_roundtrip(citations, tmp_path):
    p = tmp_path / "c.jsonl"
    persist(citations, p)
    assert ingest(p) == citations
    assert ingest_text(dumps(citations)) == citations


def test_nullary_roundtrip():
    s = Structure(Signature.of(Z=0, R=1), "ab", {"Z": [()], "R": [("b",)]})
    back = ingest_text(dumps(s))
    assert back == s and back.nullary("Z")


def test_expand_keeps_old_relations(citations):
    e = citations.expand([("Hub", 1)], {"Hub": [(0,)]})
    assert e.restrict(citations.signature) == citations
    with pytest.raises(ValueError):
        citations.expand([("Author", 1)], {})


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=14))
    names = [f"v{i}" for i in range(n)]
    return Structure(Signature.of(E=2), names, {"E": [(names[a], names[b]) for a, b in edges]})


@settings(max_examples=60, deadline=None)
@given(graphs(), st.integers(0, 3), st.data())
def test_materialize_matches_induced(s, r, data):
    centers = data.draw(st.lists(st.integers(0, s.size - 1), min_size=1, max_size=3))
    audit = AccessAudit()
    local, gmap = materialize(LocalOracle(s, audit), centers, r)
    expected = induced_neighborhood(s, centers, r)
    assert local == expected
    assert audit.global_scans == 0
    assert sorted(gmap) == sorted(ball(s.gaifman, centers, r))


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_distance_symmetric_and_triangle(s):
    g = s.gaifman
    for a, b, c in itertools.product(range(min(s.size, 5)), repeat=3):
        assert distance(g, a, b) == distance(g, b, a)
        assert distance(g, a, c) <= distance(g, a, b) + distance(g, b, c)
