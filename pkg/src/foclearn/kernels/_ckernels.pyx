# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same API and results as _pykernels."""

import numpy as np
from libc.stdint cimport int64_t

cdef enum:
    UNARY = 0
    BINARY = 1
    EQ = 2
    DIST = 3
    CONST = 4


cdef class _G:
    cdef const int64_t[::1] gptr
    cdef const int64_t[::1] gidx
    cdef const int64_t[::1] bptr
    cdef const int64_t[::1] bidx
    cdef const unsigned char[:, ::1] uarr
    cdef int64_t n, n1, cur, bcur
    cdef int64_t[::1] stamp, queue, dep
    cdef int64_t[::1] bstamp, bqueue, bdep

    def __init__(self, kg):
        self.gptr = kg.gptr
        self.gidx = kg.gidx
        self.bptr = kg.bptr
        self.bidx = kg.bidx
        self.uarr = kg.uarr
        self.n = kg.n
        self.n1 = kg.n + 1
        size = max(kg.n, 1)
        self.stamp = np.zeros(size, dtype=np.int64)
        self.queue = np.zeros(size, dtype=np.int64)
        self.dep = np.zeros(size, dtype=np.int64)
        self.bstamp = np.zeros(size, dtype=np.int64)
        self.bqueue = np.zeros(size, dtype=np.int64)
        self.bdep = np.zeros(size, dtype=np.int64)
        self.cur = 0
        self.bcur = 0


cdef inline bint _in_range(const int64_t[::1] arr, int64_t lo, int64_t hi, int64_t x):
    cdef int64_t mid
    cdef int64_t end = hi
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < end and arr[lo] == x


cdef inline bint _adjacent(_G g, int64_t u, int64_t v):
    cdef int64_t lo = g.gptr[u], hi = g.gptr[u + 1]
    if lo == hi:
        return False
    return _in_range(g.gidx, lo, hi, v)


cdef bint _dist_le(_G g, int64_t u, int64_t v, int64_t r):
    cdef int64_t head, tail, x, dx, i, w
    if u == v:
        return True
    if r == 0:
        return False
    if r == 1:
        return _adjacent(g, u, v)
    g.cur += 1
    g.stamp[u] = g.cur
    g.queue[0] = u
    g.dep[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = g.queue[head]
        dx = g.dep[head]
        head += 1
        if dx >= r:
            continue
        for i in range(g.gptr[x], g.gptr[x + 1]):
            w = g.gidx[i]
            if w == v:
                return True
            if g.stamp[w] != g.cur:
                g.stamp[w] = g.cur
                g.queue[tail] = w
                g.dep[tail] = dx + 1
                tail += 1
    return False


cdef int64_t _ball_into(_G g, const int64_t[::1] src, int64_t radius):
    """BFS from src up to radius; result left in g.bqueue[0:return]."""
    cdef int64_t head = 0, tail = 0, x, dx, i, w, k
    g.bcur += 1
    for k in range(src.shape[0]):
        x = src[k]
        if g.bstamp[x] != g.bcur:
            g.bstamp[x] = g.bcur
            g.bqueue[tail] = x
            g.bdep[tail] = 0
            tail += 1
    while head < tail:
        x = g.bqueue[head]
        dx = g.bdep[head]
        head += 1
        if dx >= radius:
            continue
        for i in range(g.gptr[x], g.gptr[x + 1]):
            w = g.gidx[i]
            if g.bstamp[w] != g.bcur:
                g.bstamp[w] = g.bcur
                g.bqueue[tail] = w
                g.bdep[tail] = dx + 1
                tail += 1
    return tail


cdef inline bint _lit(_G g, const int64_t[:, ::1] rows, int64_t j, int64_t[::1] asg):
    cdef int64_t kind = rows[j, 0]
    cdef bint val
    cdef int64_t base
    if kind == UNARY:
        val = g.uarr[rows[j, 4], asg[rows[j, 2]]] != 0
    elif kind == BINARY:
        base = rows[j, 4] * g.n1 + asg[rows[j, 2]]
        val = _in_range(g.bidx, g.bptr[base], g.bptr[base + 1], asg[rows[j, 3]])
    elif kind == EQ:
        val = asg[rows[j, 2]] == asg[rows[j, 3]]
    elif kind == DIST:
        val = _dist_le(g, asg[rows[j, 2]], asg[rows[j, 3]], rows[j, 5])
    else:
        val = True
    if rows[j, 1]:
        return not val
    return val


cdef (int64_t, int64_t) _count(_G g, const int64_t[:, ::1] rows, int64_t[::1] lo,
                               int64_t[::1] hi, int64_t fixed_hi, int64_t nvars,
                               int64_t nfix, int64_t[::1] asg,
                               const int64_t[::1] cands, int64_t ncand,
                               int64_t[::1] pos):
    cdef int64_t count = 0, tested = 0, j, depth
    cdef bint ok, last
    for j in range(fixed_hi):
        if not _lit(g, rows, j, asg):
            return 0, 0
    if nfix == nvars:
        return 1, 1
    depth = nfix
    pos[depth] = 0
    while depth >= nfix:
        if pos[depth] >= ncand:
            depth -= 1
            if depth >= nfix:
                pos[depth] += 1
            continue
        asg[depth] = cands[pos[depth]]
        last = depth == nvars - 1
        if last:
            tested += 1
        ok = True
        for j in range(lo[depth], hi[depth]):
            if not _lit(g, rows, j, asg):
                ok = False
                break
        if ok and not last:
            depth += 1
            pos[depth] = 0
            continue
        if ok:
            count += 1
        pos[depth] += 1
    return count, tested


def _levels(prog, int64_t nfix):
    rows = np.ascontiguousarray(prog.rows, dtype=np.int64).reshape(-1, 7)
    nvars = prog.nvars
    lo = np.zeros(max(nvars, 1), dtype=np.int64)
    hi = np.zeros(max(nvars, 1), dtype=np.int64)
    levels = rows[:, 6] if len(rows) else np.zeros(0, dtype=np.int64)
    fixed_hi = int(np.searchsorted(levels, nfix, side="left"))
    for d in range(nvars):
        lo[d] = np.searchsorted(levels, d, side="left")
        hi[d] = np.searchsorted(levels, d, side="right")
    return rows, lo, hi, fixed_hi


def ball(kg, const int64_t[::1] src, long radius):
    cdef _G g = _G(kg)
    cdef int64_t n = _ball_into(g, src, radius)
    return np.sort(np.asarray(g.bqueue[:n]).copy())


def count_extensions(kg, prog, prefix, cands):
    cdef _G g = _G(kg)
    cdef int64_t nfix = len(prefix)
    cdef int64_t nvars = prog.nvars
    rows, lo, hi, fixed_hi = _levels(prog, nfix)
    asg = np.zeros(max(nvars, 1), dtype=np.int64)
    asg[:nfix] = prefix
    pos = np.zeros(max(nvars, 1) + 1, dtype=np.int64)
    cand = np.ascontiguousarray(cands, dtype=np.int64)
    c, t = _count(g, rows, lo, hi, fixed_hi, nvars, nfix, asg, cand, cand.shape[0], pos)
    return int(c), int(t)


def ground_count(kg, prog, long radius):
    cdef _G g = _G(kg)
    cdef int64_t nvars = prog.nvars
    cdef int64_t v, nb, c, t, total = 0, iters = 0, worst = 0
    rows, lo, hi, fixed_hi = _levels(prog, 1)
    cdef int64_t[::1] asg = np.zeros(max(nvars, 1), dtype=np.int64)
    cdef int64_t[::1] pos = np.zeros(max(nvars, 1) + 1, dtype=np.int64)
    cdef int64_t[::1] one = np.zeros(1, dtype=np.int64)
    cdef int64_t[::1] empty = np.zeros(1, dtype=np.int64)
    cdef const int64_t[:, ::1] rview = rows
    cdef int64_t[::1] lov = lo
    cdef int64_t[::1] hiv = hi
    for v in range(g.n):
        asg[0] = v
        if nvars > 1:
            one[0] = v
            nb = _ball_into(g, one, radius)
            c, t = _count(g, rview, lov, hiv, fixed_hi, nvars, 1, asg, g.bqueue, nb, pos)
        else:
            c, t = _count(g, rview, lov, hiv, fixed_hi, nvars, 1, asg, empty, 0, pos)
        total += c
        iters += t
        if t > worst:
            worst = t
    return int(total), int(iters), int(worst)
