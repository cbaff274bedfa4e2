# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled left-right planarity test and greedy PMFG edge selection.

Same algorithm and data layout as ``_lr_py``; state lives in flat int
buffers sized once for the largest graph a caller will test.
"""

from libc.stdlib cimport malloc, free

import numpy as np

cdef enum:
    NONE = -1


cdef class _LRState:
    cdef int n, mmax, m, sp
    cdef int *deg
    cdef int *off
    cdef int *nbr
    cdef int *nid
    cdef int *height
    cdef int *parent_edge
    cdef int *src
    cdef int *dst
    cdef int *lowpt
    cdef int *lowpt2
    cdef int *nesting
    cdef int *outoff
    cdef int *outcnt
    cdef int *outs
    cdef int *ref
    cdef int *lowpt_edge
    cdef int *stack_bottom
    cdef int *stack

    def __cinit__(self, int n, int mmax):
        self.n = n
        self.mmax = mmax
        self.deg = <int *> malloc(n * sizeof(int))
        self.off = <int *> malloc((n + 1) * sizeof(int))
        self.nbr = <int *> malloc(2 * mmax * sizeof(int))
        self.nid = <int *> malloc(2 * mmax * sizeof(int))
        self.height = <int *> malloc(n * sizeof(int))
        self.parent_edge = <int *> malloc(n * sizeof(int))
        self.src = <int *> malloc(mmax * sizeof(int))
        self.dst = <int *> malloc(mmax * sizeof(int))
        self.lowpt = <int *> malloc(mmax * sizeof(int))
        self.lowpt2 = <int *> malloc(mmax * sizeof(int))
        self.nesting = <int *> malloc(mmax * sizeof(int))
        self.outoff = <int *> malloc((n + 1) * sizeof(int))
        self.outcnt = <int *> malloc(n * sizeof(int))
        self.outs = <int *> malloc(mmax * sizeof(int))
        self.ref = <int *> malloc(mmax * sizeof(int))
        self.lowpt_edge = <int *> malloc(mmax * sizeof(int))
        self.stack_bottom = <int *> malloc(mmax * sizeof(int))
        self.stack = <int *> malloc(4 * (mmax + 1) * sizeof(int))
        if (self.deg == NULL or self.off == NULL or self.nbr == NULL or self.nid == NULL
                or self.height == NULL or self.parent_edge == NULL or self.src == NULL
                or self.dst == NULL or self.lowpt == NULL or self.lowpt2 == NULL
                or self.nesting == NULL or self.outoff == NULL or self.outcnt == NULL
                or self.outs == NULL or self.ref == NULL or self.lowpt_edge == NULL
                or self.stack_bottom == NULL or self.stack == NULL):
            raise MemoryError()

    def __dealloc__(self):
        free(self.deg); free(self.off); free(self.nbr); free(self.nid)
        free(self.height); free(self.parent_edge); free(self.src); free(self.dst)
        free(self.lowpt); free(self.lowpt2); free(self.nesting); free(self.outoff)
        free(self.outcnt); free(self.outs); free(self.ref); free(self.lowpt_edge)
        free(self.stack_bottom); free(self.stack)

    cdef void _build(self, int m, const int *us, const int *vs) nogil:
        cdef int i, k, a, b
        self.m = m
        for i in range(self.n):
            self.deg[i] = 0
            self.height[i] = NONE
            self.parent_edge[i] = NONE
            self.outcnt[i] = 0
        for k in range(m):
            self.deg[us[k]] += 1
            self.deg[vs[k]] += 1
            self.src[k] = NONE
            self.ref[k] = NONE
            self.lowpt_edge[k] = NONE
        self.off[0] = 0
        for i in range(self.n):
            self.off[i + 1] = self.off[i] + self.deg[i]
            self.deg[i] = 0
        for k in range(m):
            a = us[k]
            b = vs[k]
            self.nbr[self.off[a] + self.deg[a]] = b
            self.nid[self.off[a] + self.deg[a]] = k
            self.deg[a] += 1
            self.nbr[self.off[b] + self.deg[b]] = a
            self.nid[self.off[b] + self.deg[b]] = k
            self.deg[b] += 1
        self.sp = 0

    cdef void _orient(self, int v) nogil:
        cdef int e = self.parent_edge[v]
        cdef int p, w, k
        cdef int *lowpt = self.lowpt
        cdef int *lowpt2 = self.lowpt2
        for p in range(self.off[v], self.off[v + 1]):
            k = self.nid[p]
            if self.src[k] != NONE:
                continue
            w = self.nbr[p]
            self.src[k] = v
            self.dst[k] = w
            self.outcnt[v] += 1
            lowpt[k] = self.height[v]
            lowpt2[k] = self.height[v]
            if self.height[w] == NONE:
                self.parent_edge[w] = k
                self.height[w] = self.height[v] + 1
                self._orient(w)
            else:
                lowpt[k] = self.height[w]
            self.nesting[k] = 2 * lowpt[k] + (1 if lowpt2[k] < self.height[v] else 0)
            if e != NONE:
                if lowpt[k] < lowpt[e]:
                    lowpt2[e] = min(lowpt[e], lowpt2[k])
                    lowpt[e] = lowpt[k]
                elif lowpt[k] > lowpt[e]:
                    lowpt2[e] = min(lowpt2[e], lowpt[k])
                else:
                    lowpt2[e] = min(lowpt2[e], lowpt2[k])

    cdef void _sort_out(self) nogil:
        # out-edges grouped by source in discovery order, then insertion-sorted
        # by nesting depth (stable, matching the Python fallback)
        cdef int i, k, pos, j, key, cur
        self.outoff[0] = 0
        for i in range(self.n):
            self.outoff[i + 1] = self.outoff[i] + self.outcnt[i]
            self.outcnt[i] = 0
        for i in range(self.n):
            for pos in range(self.off[i], self.off[i + 1]):
                k = self.nid[pos]
                if self.src[k] == i:
                    self.outs[self.outoff[i] + self.outcnt[i]] = k
                    self.outcnt[i] += 1
        for i in range(self.n):
            for pos in range(self.outoff[i] + 1, self.outoff[i + 1]):
                cur = self.outs[pos]
                key = self.nesting[cur]
                j = pos - 1
                while j >= self.outoff[i] and self.nesting[self.outs[j]] > key:
                    self.outs[j + 1] = self.outs[j]
                    j -= 1
                self.outs[j + 1] = cur

    cdef inline bint _conflicting(self, int low, int high, int b) nogil:
        return not (low == NONE and high == NONE) and self.lowpt[high] > self.lowpt[b]

    cdef inline int _lowest(self, int *p) nogil:
        if p[0] == NONE and p[1] == NONE:
            return self.lowpt[p[2]]
        if p[2] == NONE and p[3] == NONE:
            return self.lowpt[p[0]]
        return min(self.lowpt[p[0]], self.lowpt[p[2]])

    cdef bint _test(self, int v) nogil:
        cdef int e = self.parent_edge[v]
        cdef int pos, ei, w
        cdef int *top
        for pos in range(self.outoff[v], self.outoff[v + 1]):
            ei = self.outs[pos]
            w = self.dst[ei]
            self.stack_bottom[ei] = self.sp
            if ei == self.parent_edge[w]:
                if not self._test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                top = self.stack + 4 * self.sp
                top[0] = NONE
                top[1] = NONE
                top[2] = ei
                top[3] = ei
                self.sp += 1
            if self.lowpt[ei] < self.height[v]:
                if pos == self.outoff[v]:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self._add_constraints(ei, e):
                    return False
        if e != NONE:
            self._remove_back_edges(e)
        return True

    cdef bint _add_constraints(self, int ei, int e) nogil:
        cdef int p0 = NONE, p1 = NONE, p2 = NONE, p3 = NONE
        cdef int q0, q1, q2, q3, t
        cdef int *top
        cdef int *ref = self.ref
        cdef int *lowpt = self.lowpt
        while True:
            self.sp -= 1
            top = self.stack + 4 * self.sp
            q0 = top[0]; q1 = top[1]; q2 = top[2]; q3 = top[3]
            if not (q0 == NONE and q1 == NONE):
                t = q0; q0 = q2; q2 = t
                t = q1; q1 = q3; q3 = t
            if not (q0 == NONE and q1 == NONE):
                return False
            if lowpt[q2] > lowpt[e]:
                if p2 == NONE and p3 == NONE:
                    p3 = q3
                else:
                    ref[p2] = q3
                p2 = q2
            else:
                ref[q2] = self.lowpt_edge[e]
            if self.sp == self.stack_bottom[ei]:
                break
        while self.sp > 0:
            top = self.stack + 4 * (self.sp - 1)
            if not (self._conflicting(top[0], top[1], ei) or self._conflicting(top[2], top[3], ei)):
                break
            self.sp -= 1
            q0 = top[0]; q1 = top[1]; q2 = top[2]; q3 = top[3]
            if self._conflicting(q2, q3, ei):
                t = q0; q0 = q2; q2 = t
                t = q1; q1 = q3; q3 = t
            if self._conflicting(q2, q3, ei):
                return False
            if p2 != NONE:
                ref[p2] = q3
            if q2 != NONE:
                p2 = q2
            if p0 == NONE and p1 == NONE:
                p1 = q1
            else:
                ref[p0] = q1
            p0 = q0
        if not (p0 == NONE and p1 == NONE and p2 == NONE and p3 == NONE):
            top = self.stack + 4 * self.sp
            top[0] = p0; top[1] = p1; top[2] = p2; top[3] = p3
            self.sp += 1
        return True

    cdef void _remove_back_edges(self, int e) nogil:
        cdef int u = self.src[e]
        cdef int hu = self.height[u]
        cdef int hl, hr
        cdef int *p
        cdef int *ref = self.ref
        while self.sp > 0 and self._lowest(self.stack + 4 * (self.sp - 1)) == hu:
            self.sp -= 1
        if self.sp > 0:
            p = self.stack + 4 * (self.sp - 1)
            while p[1] != NONE and self.dst[p[1]] == u:
                p[1] = ref[p[1]]
            if p[1] == NONE and p[0] != NONE:
                ref[p[0]] = p[2]
                p[0] = NONE
            while p[3] != NONE and self.dst[p[3]] == u:
                p[3] = ref[p[3]]
            if p[3] == NONE and p[2] != NONE:
                ref[p[2]] = p[0]
                p[2] = NONE
        if self.lowpt[e] < hu:
            p = self.stack + 4 * (self.sp - 1)
            hl = p[1]
            hr = p[3]
            if hl != NONE and (hr == NONE or self.lowpt[hl] > self.lowpt[hr]):
                ref[e] = hl
            else:
                ref[e] = hr

    cdef bint run(self, int m, const int *us, const int *vs) nogil:
        cdef int v
        if self.n > 2 and m > 3 * self.n - 6:
            return False
        self._build(m, us, vs)
        for v in range(self.n):
            if self.height[v] == NONE:
                self.height[v] = 0
                self._orient(v)
        self._sort_out()
        for v in range(self.n):
            if self.height[v] == 0:
                if not self._test(v):
                    return False
        return True


def is_planar(int n, us, vs):
    """Left-right planarity test of the simple graph with edges ``(us[k], vs[k])``."""
    cdef int[::1] a = np.ascontiguousarray(us, dtype=np.intc)
    cdef int[::1] b = np.ascontiguousarray(vs, dtype=np.intc)
    cdef int m = a.shape[0]
    if n > 2 and m > 3 * n - 6:
        return False
    if m == 0:
        return True
    cdef _LRState st = _LRState(n, m)
    return bool(st.run(m, &a[0], &b[0]))


cdef int _find(int *parent, int a) nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def pmfg_select(int n, cand_u, cand_v, int target):
    """Greedily accept candidates in order while the graph stays planar.

    Returns the accepted candidate positions.  An edge joining two
    components cannot break planarity and skips the test.
    """
    cdef int[::1] cu = np.ascontiguousarray(cand_u, dtype=np.intc)
    cdef int[::1] cv = np.ascontiguousarray(cand_v, dtype=np.intc)
    cdef int ncand = cu.shape[0]
    cdef int mmax = max(target + 1, 1)
    cdef _LRState st = _LRState(n, mmax)
    cdef int[::1] us = np.empty(mmax, dtype=np.intc)
    cdef int[::1] vs = np.empty(mmax, dtype=np.intc)
    cdef int[::1] parent = np.arange(max(n, 1), dtype=np.intc)
    cdef int[::1] accepted = np.empty(max(target, 1), dtype=np.intc)
    cdef int count = 0, pos, a, b, ra, rb
    with nogil:
        for pos in range(ncand):
            if count >= target:
                break
            a = cu[pos]
            b = cv[pos]
            ra = _find(&parent[0], a)
            rb = _find(&parent[0], b)
            us[count] = a
            vs[count] = b
            if ra != rb:
                parent[ra] = rb
            elif not st.run(count + 1, &us[0], &vs[0]):
                continue
            accepted[count] = pos
            count += 1
    return np.asarray(accepted[:count]).tolist()
