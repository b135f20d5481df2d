"""Scaling benchmark: precompute and learn phases on synthetic bounded-degree graphs."""

from __future__ import annotations

import gc
import random
import time

from .evaluator import Evaluator
from .grammar import HypothesisClassConfig
from .learner import Reject, TrainingSet, learn
from .parser import parse_term
from .precompute import precompute
from .relstore import AccessAudit, LocalOracle
from .synth import bounded_degree_graph

BENCH_TARGET = "#(z1).(E(x1,z1) & Red(z1)) + 2 * #(z1).(E(z1,x1) & Blue(z1))"


def bench_config(ell: int = 0) -> HypothesisClassConfig:
    return HypothesisClassConfig(
        k=1,
        ell=ell,
        integers=(2,),
        max_count_vars=2,
        max_literals=2,
        max_summands=2,
        psi_library=(
            "E(x1,z1) & Red(z1)",
            "E(z1,x1) & Blue(z1)",
            "E(z1,z2) & Red(z1)",
            "hasred(z1) & Blue(z1)",
        ),
        templates=(("hasred", "exists w. (E(u,w) & Red(w))"),),
    )


def _labels(s, handles):
    t = parse_term(BENCH_TARGET)
    ev = Evaluator(s)
    return [((h,), ev.term(t, {"x1": h})) for h in handles]


def _timed_precompute(st, cfg):
    # like timeit: keep collector pauses over an unrelated heap out of the timing
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter()
        ix = precompute(st, cfg)
        return time.perf_counter() - t0, ix
    finally:
        gc.enable()


def run_bench(ns, d: int, s: int, seed: int, ell: int = 0, repeat: int = 7) -> list[dict]:
    """Rows per n; precompute wall time is the best of ``repeat`` runs.

    Repeats go round-robin over n so a burst of host load hits every size
    alike instead of all samples of one size.
    """
    cfg = bench_config(ell)
    structures = {n: bounded_degree_graph(n, d, seed) for n in ns}
    best: dict = {}
    index = {}
    for _ in range(max(repeat, 1)):
        for n in ns:
            dt, index[n] = _timed_precompute(structures[n], cfg)
            best[n] = min(best.get(n, dt), dt)
    rows = []
    for n in ns:
        st, ix = structures[n], index[n]
        rows.append({"n": n, "d": d, "s": s, "phase": "precompute", "wall_time": best[n], "oracle_calls": 0})
        rng = random.Random(seed)
        handles = rng.sample(range(n), s)
        ts = TrainingSet.from_pairs(_labels(st, handles))
        audit = AccessAudit()
        t0 = time.perf_counter()
        h = learn(ts, ix, cfg, LocalOracle(ix.structure, audit))
        wall = time.perf_counter() - t0
        if isinstance(h, Reject):
            raise AssertionError("benchmark target was rejected")
        snap = audit.snapshot()
        calls = snap["membership_queries"] + snap["neighbor_queries"]
        rows.append({"n": n, "d": d, "s": s, "phase": "learn", "wall_time": wall, "oracle_calls": calls})
    return rows
