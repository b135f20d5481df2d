import random
import zipfile

import pytest

from foclearn.decompose import Decomposer, s_eval
from foclearn.evaluator import evaluate
from foclearn.grammar import HypothesisClassConfig
from foclearn.parser import parse
from foclearn.precompute import (
    CorruptIndexError,
    IndexVersionError,
    TemplateLocalisationError,
    load_index,
    precompute,
    save_index,
)
from foclearn.relstore import Signature, Structure
from foclearn.synth import bounded_degree_graph


def test_single_element_true_count():
    s = Structure(Signature.of(E=2), ["a"], {})
    ix = precompute(s, HypothesisClassConfig(k=1, psi_library=("z1 = z1",)))
    assert ix.table == {"#(z1).true": 1}


def test_single_edge_pairs():
    s = Structure(Signature.of(E=2), ["a", "b"], {"E": [("a", "b")]})
    ix = precompute(s, HypothesisClassConfig(k=1, max_count_vars=2, psi_library=("!(z1 = z2)",)))
    assert ix.table["#(z1,z2).(!(z1 = z2) & dist(z1,z2) <= 1)"] == 2
    dec = Decomposer(1)
    total = dec.count(parse("#(z1,z2).!(z1 = z2)"))
    assert s_eval(total, ix.table.__getitem__) == 2


def test_table_matches_global_evaluation():
    s = bounded_degree_graph(40, 3, seed=2)
    cfg = HypothesisClassConfig(
        k=1,
        max_count_vars=2,
        psi_library=("E(z1,z2) & Red(z1)", "Red(z1) & !Blue(z2) & !E(z1,z2)", "E(x1,z1) & Blue(z2)"),
        templates=(("hasred", "exists w. (E(u,w) & Red(w))"),),
    )
    ix = precompute(s, cfg)
    assert ix.table
    for key, value in ix.table.items():
        assert evaluate(parse(key), ix.structure) == value
    assert ix.structure.restrict(s.signature) == s
    for entry in ix.meta["entries"].values():
        assert entry["max_per_element"] <= entry["iterations"]


def test_template_relation_matches_formula():
    s = bounded_degree_graph(30, 3, seed=4)
    cfg = HypothesisClassConfig(k=1, psi_library=("hasred(z1)",), templates=(("hasred", "exists w. (E(u,w) & Red(w))"),))
    ix = precompute(s, cfg)
    phi = parse("exists w. (E(u,w) & Red(w))")
    for v in range(s.size):
        assert ((v,) in ix.structure.relation("hasred")) == evaluate(phi, s, {"u": v})


def test_template_outside_fragment():
    s = Structure(Signature.of(E=2), "ab", {})
    cfg = HypothesisClassConfig(templates=(("deep", "exists a. exists b. exists c. exists w. E(u,w)"),))
    with pytest.raises(TemplateLocalisationError):
        precompute(s, cfg)


def test_save_load_roundtrip(tmp_path):
    s = bounded_degree_graph(20, 3, seed=1)
    cfg = HypothesisClassConfig(k=1, max_count_vars=2, psi_library=("E(z1,z2) & Red(z2)",))
    ix = precompute(s, cfg)
    p = tmp_path / "ix.zip"
    save_index(ix, p)
    back = load_index(p, cfg)
    assert back == ix
    assert back.index_hash == ix.index_hash


def test_truncated_file(tmp_path):
    s = bounded_degree_graph(20, 3, seed=1)
    ix = precompute(s, HypothesisClassConfig(k=1))
    p = tmp_path / "ix.zip"
    save_index(ix, p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptIndexError):
        load_index(p)


def test_config_mismatch(tmp_path):
    s = bounded_degree_graph(10, 2, seed=1)
    ix = precompute(s, HypothesisClassConfig(k=1))
    p = tmp_path / "ix.zip"
    save_index(ix, p)
    with pytest.raises(IndexVersionError):
        load_index(p, HypothesisClassConfig(k=2))


def test_format_version_mismatch(tmp_path):
    s = bounded_degree_graph(10, 2, seed=1)
    ix = precompute(s, HypothesisClassConfig(k=1))
    ix.meta["format_version"] = 99
    p = tmp_path / "ix.zip"
    save_index(ix, p)
    with pytest.raises(IndexVersionError):
        load_index(p)
