import pytest

from foclearn import syntax as S
from foclearn.grammar import (
    ConfigError,
    HypothesisClassConfig,
    Library,
    parse_templates,
)
from foclearn.parser import parse_formula
from foclearn.relstore import Signature

SIG = Signature.of(E=2, Red=1)


def test_config_json_roundtrip():
    cfg = HypothesisClassConfig(k=1, ell=1, integers=(2, 3), templates=(("hub", "exists w. E(u,w)"),))
    back = HypothesisClassConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.cfg_hash() == cfg.cfg_hash()
    assert HypothesisClassConfig(k=2).cfg_hash() != cfg.cfg_hash()


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        HypothesisClassConfig.from_json({"k": 1, "colour": 3})


def test_rho():
    assert HypothesisClassConfig(locality_radius=0).rho == 1
    assert HypothesisClassConfig(locality_radius=2).rho == 5


def test_template_instantiation_renames_bound():
    cfg = HypothesisClassConfig(templates=(("hub", "exists w. E(u,w)"),))
    (t,) = parse_templates(cfg, SIG)
    inst = t.instantiate("z1")
    assert inst.free == {"z1"}
    assert isinstance(inst, S.Exists) and inst.var.startswith("hub_b")


def test_template_errors():
    with pytest.raises(ConfigError):
        parse_templates(HypothesisClassConfig(templates=(("E", "Red(u)"),)), SIG)
    with pytest.raises(ConfigError):
        parse_templates(HypothesisClassConfig(templates=(("two", "E(u,v)"),)), SIG)


def test_library_order_deterministic():
    cfg = HypothesisClassConfig(k=1, integers=(2,), max_summands=2, psi_library=("E(x1,z1)", "E(x1,z1) & Red(z1)"))
    lib = Library(cfg, SIG)
    terms = [str(lib.sigma(t)) for t in lib.terms()]
    assert terms == [str(Library(cfg, SIG).sigma(t)) for t in Library(cfg, SIG).terms()]
    assert terms[0] == "2"
    sizes = [len(t.units) for t in lib.terms()]
    assert sizes == sorted(sizes)
    assert lib.count_terms() == len(terms)


def test_library_at_most_one_constant():
    cfg = HypothesisClassConfig(k=1, integers=(2, 3), max_summands=2, psi_library=("E(x1,z1)",))
    for t in Library(cfg, SIG).terms():
        assert sum(u.pattern is None for u in t.units) <= 1


def test_generated_patterns_cover_bound_vars():
    cfg = HypothesisClassConfig(k=1, max_count_vars=1, max_literals=2)
    lib = Library(cfg, SIG)
    assert lib.patterns
    for p in lib.patterns:
        positive = {v for lit in p.literals if not isinstance(lit, S.Not) for v in lit.free}
        assert set(p.bound) <= positive


def test_size_cap_filters():
    cfg = HypothesisClassConfig(k=1, q=10, psi_library=("E(x1,z1) & Red(z1)",))
    lib = Library(cfg, SIG)
    assert all(lib.sigma(t).size <= 10 for t in lib.terms())
