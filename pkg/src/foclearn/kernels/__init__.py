"""Hot loops: bounded BFS and counting extensions of a literal conjunction.

A compiled extension is used when available; set FOCLEARN_PURE_PYTHON=1 to
force the pure-Python fallback. Both backends share :class:`KernelGraph`
and the literal program encoding below.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernels

# literal program columns
UNARY, BINARY, EQ, DIST, CONST, NARY = 0, 1, 2, 3, 4, 5
COLS = 7  # kind, neg, a, b, rel, radius, level


class KernelGraph:
    """Array view of a structure: Gaifman CSR plus relation tables by arity."""

    def __init__(self, structure):
        self.structure = structure
        n = len(structure)
        self.n = n
        g = structure.gaifman
        indptr, indices = g.csr
        self.gptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.gidx = np.ascontiguousarray(indices, dtype=np.int64)
        self.unary_index: dict[str, int] = {}
        self.binary_index: dict[str, int] = {}
        self.nary_index: dict[str, int] = {}
        self.nullary: dict[str, bool] = {}
        unary, binary, nary = [], [], []
        for rel, arity in structure.signature:
            if arity == 0:
                self.nullary[rel] = bool(structure.relation(rel))
            elif arity == 1:
                self.unary_index[rel] = len(unary)
                col = np.zeros(n, dtype=np.uint8)
                for (v,) in structure.relation(rel):
                    col[v] = 1
                unary.append(col)
            elif arity == 2:
                self.binary_index[rel] = len(binary)
                binary.append(structure.relation(rel))
            else:
                self.nary_index[rel] = len(nary)
                nary.append(structure.relation(rel))
        self.uarr = np.ascontiguousarray(
            np.stack(unary) if unary else np.zeros((1, max(n, 1)), dtype=np.uint8)
        )
        nb = len(binary)
        bptr = np.zeros(max(nb, 1) * (n + 1), dtype=np.int64)
        chunks = []
        offset = 0
        for b, tuples in enumerate(binary):
            rows: list[list[int]] = [[] for _ in range(n)]
            for u, v in tuples:
                rows[u].append(v)
            base = b * (n + 1)
            for u in range(n):
                bptr[base + u] = offset
                rows[u].sort()
                chunks.extend(rows[u])
                offset += len(rows[u])
            bptr[base + n] = offset
        self.bptr = bptr
        self.bidx = np.asarray(chunks, dtype=np.int64) if chunks else np.zeros(1, dtype=np.int64)
        self.nary = nary

    def neighbors(self, v: int) -> np.ndarray:
        return self.gidx[self.gptr[v] : self.gptr[v + 1]]


@dataclass(frozen=True)
class Program:
    rows: np.ndarray  # shape (L, COLS), sorted by level
    nvars: int
    nary_args: tuple = ()
    const_false: bool = False

    @property
    def has_nary(self) -> bool:
        return bool(len(self.rows)) and bool((self.rows[:, 0] == NARY).any())


def _load_backend():
    if os.environ.get("FOCLEARN_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels, "python"
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "cython"


backend, BACKEND = _load_backend()


def ball(kg: KernelGraph, sources, radius: int) -> np.ndarray:
    src = np.asarray(list(sources), dtype=np.int64)
    return backend.ball(kg, src, int(radius))


def count_extensions(kg: KernelGraph, prog: Program, prefix, cands) -> tuple[int, int]:
    """Count assignments of the non-prefix variables drawn from ``cands``.

    Returns (count, tuples_tested).
    """
    if prog.const_false:
        return 0, 0
    pre = np.asarray(list(prefix), dtype=np.int64)
    cand = np.asarray(cands, dtype=np.int64)
    impl = _pykernels if prog.has_nary else backend
    return impl.count_extensions(kg, prog, pre, cand)


def ground_count(kg: KernelGraph, prog: Program, radius: int) -> tuple[int, int, int]:
    """Loop for a ground term: v1 over the universe, the rest over its ball.

    Returns (count, total_iterations, max_iterations_for_one_v1).
    """
    if prog.const_false:
        return 0, 0, 0
    impl = _pykernels if prog.has_nary else backend
    return impl.ground_count(kg, prog, int(radius))


def compile_program(literals, order, kg: KernelGraph) -> Program:
    """Encode a conjunction of literals over variables ``order`` for the kernels.

    Literals are Atom/Eq/Dist/Truth nodes, optionally under one negation.
    Constant literals are folded away.
    """
    from .. import syntax as S

    index = {v: i for i, v in enumerate(order)}
    rows = []
    nary_args = []
    for lit in literals:
        neg = 0
        node = lit
        if isinstance(node, S.Not):
            neg = 1
            node = node.sub
        if isinstance(node, S.Truth) or (isinstance(node, S.Atom) and not node.args):
            value = node.value if isinstance(node, S.Truth) else kg.nullary[node.rel]
            if value == bool(neg):
                return Program(np.zeros((0, COLS), dtype=np.int64), len(order), (), True)
            continue
        if isinstance(node, S.Atom):
            idx = [index[v] for v in node.args]
            level = max(idx)
            if len(idx) == 1:
                rows.append((UNARY, neg, idx[0], 0, kg.unary_index[node.rel], 0, level))
            elif len(idx) == 2:
                rows.append((BINARY, neg, idx[0], idx[1], kg.binary_index[node.rel], 0, level))
            else:
                nary_args.append((kg.nary_index[node.rel], tuple(idx)))
                rows.append((NARY, neg, len(nary_args) - 1, 0, 0, 0, level))
        elif isinstance(node, S.Eq):
            a, b = index[node.a], index[node.b]
            rows.append((EQ, neg, a, b, 0, 0, max(a, b)))
        elif isinstance(node, S.Dist):
            a, b = index[node.a], index[node.b]
            rows.append((DIST, neg, a, b, 0, node.radius, max(a, b)))
        else:
            raise TypeError(f"not a literal: {lit}")
    # cheap kinds first within a level
    cost = {UNARY: 0, EQ: 0, BINARY: 1, NARY: 2, DIST: 3, CONST: 0}
    rows.sort(key=lambda r: (r[6], cost[r[0]], r))
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, COLS)
    return Program(np.ascontiguousarray(arr), len(order), tuple(nary_args))
