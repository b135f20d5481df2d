"""Randomised cross-checks of the optimised pipeline against the brute-force oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .evaluator import EvaluationOverflow, Evaluator
from .grammar import HypothesisClassConfig, Library
from .learner import Reject, TrainingSet, evaluate_hypothesis, learn
from .oracle import NaiveOverflow, naive_eval, naive_learn
from .precompute import precompute
from .relstore import AccessAudit, LocalOracle, Signature, Structure
from .synth import random_expression, random_structure

PLANT_SIGNATURE = Signature.of(E=2, Red=1, Blue=1)
TEMPLATE = ("hasred", "exists w. (E(u,w) & Red(w))")


def semantics_campaign(seed: int, count: int, budget: int = 8):
    """Evaluator vs naive semantics; returns (mismatches, first few examples)."""
    sig = Signature.of(E=2, R=1, T=3, Z=0)
    rng = random.Random(seed)
    bad = []
    done = 0
    while done < count:
        n = rng.randint(0, 8)
        s = random_structure(sig, n, rng)
        e = random_expression(sig, rng, budget)
        if e.free and not n:
            continue
        asg = {v: rng.randrange(n) for v in e.free}
        try:
            a = Evaluator(s).eval(e, asg)
        except EvaluationOverflow:
            a = "overflow"
        try:
            b = naive_eval(e, s, asg)
        except NaiveOverflow:
            b = "overflow"
        if a != b:
            bad.append((str(e), a, b))
        done += 1
    return bad


@dataclass
class PlantedInstance:
    structure: Structure
    cfg: HypothesisClassConfig
    examples: list  # (tuple of names, label)
    target: str
    params: tuple


def planted_instance(rng: random.Random) -> PlantedInstance:
    n = rng.randint(3, 8)
    s = random_structure(PLANT_SIGNATURE, n, rng, density=0.35)
    ell = rng.randint(0, 1)
    templates = (TEMPLATE,) if rng.random() < 0.25 else ()
    cfg = HypothesisClassConfig(
        k=1, ell=ell, integers=(2,), max_count_vars=1, max_literals=2, max_summands=1, templates=templates
    )
    lib = Library(cfg, s.signature)
    terms = list(lib.terms())
    t = rng.choice(terms)
    sigma = lib.sigma(t)
    w = tuple(rng.choice(s.names) for _ in range(ell))
    picked = rng.sample(list(s.names), min(n, rng.randint(2, 5)))
    examples = []
    for a in picked:
        asg = {"x1": a, **{f"y{j + 1}": b for j, b in enumerate(w)}}
        examples.append(((a,), naive_eval(sigma, s, asg)))
    return PlantedInstance(s, cfg, examples, str(sigma), w)


def run_planted(inst: PlantedInstance, audit: AccessAudit | None = None, naive: bool = True) -> dict:
    """Learn on one instance; report verdicts, soundness and scans."""
    audit = audit or AccessAudit()
    ix = precompute(inst.structure, inst.cfg)
    oracle = LocalOracle(ix.structure, audit)
    ts = TrainingSet.from_pairs(inst.examples, ix.structure)
    h = learn(ts, ix, inst.cfg, oracle)
    out = {"accepted": not isinstance(h, Reject), "sound": True, "served_ok": True}
    if out["accepted"]:
        for tup, label in inst.examples:
            asg = {"x1": tup[0], **{f"y{j + 1}": ix.structure.name(p) for j, p in enumerate(h.params)}}
            if naive_eval(h.term, ix.structure, asg) != label:
                out["sound"] = False
            if evaluate_hypothesis(h, tup, ix, oracle) != label:
                out["served_ok"] = False
        out["term"] = str(h.term)
    if naive:
        lib = Library(inst.cfg, inst.structure.signature)
        found = naive_learn(inst.examples, (lib.sigma(t) for t in lib.terms()), inst.structure, inst.cfg.ell)
        out["naive_accepted"] = found is not None
    out["global_scans"] = audit.snapshot()["global_scans"]
    return out


def planted_campaign(seed: int, count: int, naive: bool = True) -> dict:
    rng = random.Random(seed)
    audit = AccessAudit()
    stats = {"runs": 0, "rejects": 0, "naive_rejects": 0, "disagreements": 0, "unsound": 0, "served_mismatch": 0}
    for _ in range(count):
        inst = planted_instance(rng)
        r = run_planted(inst, audit, naive)
        stats["runs"] += 1
        stats["rejects"] += not r["accepted"]
        stats["unsound"] += not r["sound"]
        stats["served_mismatch"] += not r["served_ok"]
        if naive:
            stats["naive_rejects"] += not r["naive_accepted"]
            stats["disagreements"] += r["naive_accepted"] != r["accepted"]
    stats["global_scans"] = audit.snapshot()["global_scans"]
    return stats


def out_of_library_instance() -> PlantedInstance:
    """A target needing four literals while the library allows three.

    Hub a sees eight leaves covering every Red/Blue/Green combination; hub b
    sees all but the leaf carrying all three colours. Only a four-literal
    conjunction separates a (count 1) from b (count 0).
    """
    sig = Signature.of(E=2, R=1, B=1, G=1)
    names = ["a", "b"] + [f"l{i}" for i in range(8)] + [f"m{i}" for i in range(7)]
    rels = {"E": [], "R": [], "B": [], "G": []}
    combos = [(r, bl, g) for r in (0, 1) for bl in (0, 1) for g in (0, 1)]
    for i, c in enumerate(combos):
        rels["E"].append(("a", f"l{i}"))
        for flag, rel in zip(c, "RBG"):
            if flag:
                rels[rel].append((f"l{i}",))
    for i, c in enumerate(combos[:-1]):
        rels["E"].append(("b", f"m{i}"))
        for flag, rel in zip(c, "RBG"):
            if flag:
                rels[rel].append((f"m{i}",))
    s = Structure(sig, names, rels)
    cfg = HypothesisClassConfig(k=1, ell=0, integers=(1,), max_count_vars=1, max_literals=3, max_summands=1)
    target = "#(z1).(E(x1,z1) & R(z1) & B(z1) & G(z1))"
    return PlantedInstance(s, cfg, [(("a",), 1), (("b",), 0)], target, ())


def run_checks(seed: int, instances: int) -> dict:
    sem = semantics_campaign(seed, instances * 20)
    planted = planted_campaign(seed, instances)
    failures = (
        len(sem)
        + planted["rejects"]
        + planted["disagreements"]
        + planted["unsound"]
        + planted["served_mismatch"]
        + planted["global_scans"]
    )
    return {"semantics_mismatches": len(sem), "planted": planted, "failures": failures}
