"""Compiled vs pure-Python kernels on the ground-count loop and ball queries.

    python3 benchmarks/bench_kernels.py --n 4000 --d 4
"""

import argparse
import time

import numpy as np

from foclearn import syntax as S
from foclearn.kernels import KernelGraph, _pykernels, compile_program
from foclearn.synth import bounded_degree_graph


def _timed(fn, *args, repeat=3):
    best = None
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    try:
        from foclearn.kernels import _ckernels
    except ImportError:
        print("compiled extension not built; only the Python fallback is available")
        _ckernels = None

    s = bounded_degree_graph(args.n, args.d, args.seed)
    kg = KernelGraph(s)
    lits = [
        S.Atom("E", ("z1", "z2")),
        S.Atom("Red", ("z2",)),
        S.Not(S.Atom("Blue", ("z3",))),
        S.Dist("z1", "z2", 1),
        S.Dist("z2", "z3", 1),
        S.Not(S.Dist("z1", "z3", 1)),
    ]
    prog = compile_program(lits, ["z1", "z2", "z3"], kg)
    src = np.arange(0, args.n, max(args.n // 50, 1), dtype=np.int64)

    rows = []
    for name, mod in (("python", _pykernels), ("cython", _ckernels)):
        if mod is None:
            continue
        t_count, res = _timed(mod.ground_count, kg, prog, 3)
        t_ball, _ = _timed(mod.ball, kg, src, 3)
        rows.append((name, t_count, t_ball, res[0]))
    print(f"n={args.n} d={args.d}")
    print(f"{'backend':8} {'ground_count_s':>15} {'ball_s':>10} {'value':>8}")
    for name, tc, tb, val in rows:
        print(f"{name:8} {tc:15.4f} {tb:10.5f} {val:8d}")
    if len(rows) == 2:
        assert rows[0][3] == rows[1][3], "backends disagree"
        print(f"speedup ground_count: {rows[0][1] / rows[1][1]:.1f}x")


if __name__ == "__main__":
    main()
