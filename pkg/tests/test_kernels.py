import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foclearn import syntax as S
from foclearn.kernels import KernelGraph, _pykernels, compile_program
from foclearn.synth import bounded_degree_graph

ck = pytest.importorskip("foclearn.kernels._ckernels")

LITS = [
    S.Atom("E", ("z1", "z2")),
    S.Not(S.Atom("Red", ("z2",))),
    S.Dist("z1", "z3", 2),
    S.Not(S.Eq("z1", "z3")),
    S.Atom("Blue", ("z3",)),
]


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 60), st.integers(1, 5), st.integers(0, 1000))
def test_backends_agree(n, d, seed):
    kg = KernelGraph(bounded_degree_graph(n, d, seed))
    prog = compile_program(LITS, ["z1", "z2", "z3"], kg)
    assert _pykernels.ground_count(kg, prog, 2) == ck.ground_count(kg, prog, 2)
    src = np.array([0, n // 2], dtype=np.int64)
    for r in range(3):
        assert sorted(_pykernels.ball(kg, src, r)) == sorted(ck.ball(kg, src, r))
    pre = np.array([0], dtype=np.int64)
    cand = np.arange(n, dtype=np.int64)
    assert _pykernels.count_extensions(kg, prog, pre, cand) == ck.count_extensions(kg, prog, pre, cand)


def test_const_false_program():
    kg = KernelGraph(bounded_degree_graph(10, 2, 0))
    prog = compile_program([S.Truth(False)], ["z1"], kg)
    assert prog.const_false
