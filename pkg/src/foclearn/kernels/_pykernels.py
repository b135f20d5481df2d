"""Pure-Python reference implementation of the kernels."""

from __future__ import annotations

from bisect import bisect_left
from collections import deque

import numpy as np

UNARY, BINARY, EQ, DIST, CONST, NARY = 0, 1, 2, 3, 4, 5


def _bfs(kg, sources, radius):
    gptr, gidx = kg.gptr, kg.gidx
    seen = {int(s): 0 for s in sources}
    q = deque(seen)
    while q:
        v = q.popleft()
        dv = seen[v]
        if dv >= radius:
            continue
        for w in gidx[gptr[v] : gptr[v + 1]].tolist():
            if w not in seen:
                seen[w] = dv + 1
                q.append(w)
    return seen


def ball(kg, sources, radius):
    return np.asarray(sorted(_bfs(kg, sources.tolist(), radius)), dtype=np.int64)


class _Ctx:
    def __init__(self, kg, prog):
        self.kg = kg
        self.rows = prog.rows.tolist()
        self.nary_args = prog.nary_args
        self.gptr = kg.gptr.tolist()
        self.gidx = kg.gidx.tolist()
        self.bptr = kg.bptr.tolist()
        self.bidx = kg.bidx.tolist()
        self.uarr = kg.uarr
        self.n1 = kg.n + 1

    def adjacent(self, u, v):
        lo, hi = self.gptr[u], self.gptr[u + 1]
        i = bisect_left(self.gidx, v, lo, hi)
        return i < hi and self.gidx[i] == v

    def dist_le(self, u, v, r):
        if u == v:
            return True
        if r == 0:
            return False
        if r == 1:
            return self.adjacent(u, v)
        seen = {u: 0}
        q = deque([u])
        gptr, gidx = self.gptr, self.gidx
        while q:
            x = q.popleft()
            dx = seen[x]
            if dx >= r:
                continue
            for w in gidx[gptr[x] : gptr[x + 1]]:
                if w == v:
                    return True
                if w not in seen:
                    seen[w] = dx + 1
                    q.append(w)
        return False

    def lit(self, row, asg):
        kind, neg, a, b, rel, radius, _ = row
        if kind == UNARY:
            val = bool(self.uarr[rel, asg[a]])
        elif kind == BINARY:
            base = rel * self.n1 + asg[a]
            lo, hi = self.bptr[base], self.bptr[base + 1]
            x = asg[b]
            i = bisect_left(self.bidx, x, lo, hi)
            val = i < hi and self.bidx[i] == x
        elif kind == EQ:
            val = asg[a] == asg[b]
        elif kind == DIST:
            val = self.dist_le(asg[a], asg[b], radius)
        elif kind == CONST:
            val = True
        else:
            rel_idx, args = self.nary_args[a]
            val = tuple(asg[i] for i in args) in self.kg.nary[rel_idx]
        return val != bool(neg)


def _count(ctx, nvars, prefix, cands):
    rows = ctx.rows
    nfix = len(prefix)
    asg = list(prefix) + [0] * (nvars - nfix)
    by_level = [[] for _ in range(max(nvars, 1))]
    fixed = []
    for row in rows:
        if row[6] < nfix:
            fixed.append(row)
        else:
            by_level[row[6]].append(row)
    for row in fixed:
        if not ctx.lit(row, asg):
            return 0, 0
    if nfix == nvars:
        return 1, 1
    count = 0
    tested = 0

    def rec(depth):
        nonlocal count, tested
        checks = by_level[depth]
        last = depth == nvars - 1
        for c in cands:
            asg[depth] = c
            if last:
                tested += 1
            ok = True
            for row in checks:
                if not ctx.lit(row, asg):
                    ok = False
                    break
            if not ok:
                continue
            if last:
                count += 1
            else:
                rec(depth + 1)

    rec(nfix)
    return count, tested


def count_extensions(kg, prog, prefix, cands):
    ctx = _Ctx(kg, prog)
    return _count(ctx, prog.nvars, prefix.tolist(), cands.tolist())


def ground_count(kg, prog, radius):
    ctx = _Ctx(kg, prog)
    total = 0
    iters = 0
    worst = 0
    for v in range(kg.n):
        cands = sorted(_bfs(kg, [v], radius)) if prog.nvars > 1 else []
        c, t = _count(ctx, prog.nvars, [v], cands)
        total += c
        iters += t
        worst = max(worst, t)
    return total, iters, worst
