"""Pure-Python left-right planarity test and greedy PMFG edge selection.

Mirrors ``_lr_core.pyx`` line for line; used when the compiled extension is
unavailable.  Edges are integer ids; a conflict pair is the 4-list
``[left_low, left_high, right_low, right_high]`` with ``-1`` for "none".
"""

from __future__ import annotations

import sys

NONE = -1


class _LRTest:
    def __init__(self, n, us, vs):
        m = len(us)
        self.n = n
        adj = [[] for _ in range(n)]
        for k in range(m):
            a, b = us[k], vs[k]
            adj[a].append((b, k))
            adj[b].append((a, k))
        self.adj = adj
        self.height = [NONE] * n
        self.parent_edge = [NONE] * n
        self.src = [NONE] * m
        self.dst = [NONE] * m
        self.lowpt = [0] * m
        self.lowpt2 = [0] * m
        self.nesting = [0] * m
        self.out = [[] for _ in range(n)]
        self.ref = [NONE] * m
        self.lowpt_edge = [NONE] * m
        self.stack_bottom = [0] * m
        self.stack = []

    def orient(self, v):
        height, lowpt, lowpt2 = self.height, self.lowpt, self.lowpt2
        e = self.parent_edge[v]
        for w, k in self.adj[v]:
            if self.src[k] != NONE:
                continue
            self.src[k] = v
            self.dst[k] = w
            self.out[v].append(k)
            lowpt[k] = lowpt2[k] = height[v]
            if height[w] == NONE:
                self.parent_edge[w] = k
                height[w] = height[v] + 1
                self.orient(w)
            else:
                lowpt[k] = height[w]
            self.nesting[k] = 2 * lowpt[k] + (1 if lowpt2[k] < height[v] else 0)
            if e != NONE:
                if lowpt[k] < lowpt[e]:
                    lowpt2[e] = min(lowpt[e], lowpt2[k])
                    lowpt[e] = lowpt[k]
                elif lowpt[k] > lowpt[e]:
                    lowpt2[e] = min(lowpt2[e], lowpt[k])
                else:
                    lowpt2[e] = min(lowpt2[e], lowpt2[k])

    def _conflicting(self, low, high, b):
        return not (low == NONE and high == NONE) and self.lowpt[high] > self.lowpt[b]

    def _lowest(self, p):
        lowpt = self.lowpt
        if p[0] == NONE and p[1] == NONE:
            return lowpt[p[2]]
        if p[2] == NONE and p[3] == NONE:
            return lowpt[p[0]]
        return min(lowpt[p[0]], lowpt[p[2]])

    def test(self, v):
        e = self.parent_edge[v]
        out = self.out[v]
        for idx, ei in enumerate(out):
            w = self.dst[ei]
            self.stack_bottom[ei] = len(self.stack)
            if ei == self.parent_edge[w]:
                if not self.test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                self.stack.append([NONE, NONE, ei, ei])
            if self.lowpt[ei] < self.height[v]:
                if idx == 0:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self.add_constraints(ei, e):
                    return False
        if e != NONE:
            self.remove_back_edges(e)
        return True

    def add_constraints(self, ei, e):
        S, ref, lowpt = self.stack, self.ref, self.lowpt
        p = [NONE, NONE, NONE, NONE]
        while True:
            q = S.pop()
            if not (q[0] == NONE and q[1] == NONE):
                q = [q[2], q[3], q[0], q[1]]
            if not (q[0] == NONE and q[1] == NONE):
                return False
            if lowpt[q[2]] > lowpt[e]:
                if p[2] == NONE and p[3] == NONE:
                    p[3] = q[3]
                else:
                    ref[p[2]] = q[3]
                p[2] = q[2]
            else:
                ref[q[2]] = self.lowpt_edge[e]
            if len(S) == self.stack_bottom[ei]:
                break
        while S and (self._conflicting(S[-1][0], S[-1][1], ei) or self._conflicting(S[-1][2], S[-1][3], ei)):
            q = S.pop()
            if self._conflicting(q[2], q[3], ei):
                q = [q[2], q[3], q[0], q[1]]
            if self._conflicting(q[2], q[3], ei):
                return False
            if p[2] != NONE:
                ref[p[2]] = q[3]
            if q[2] != NONE:
                p[2] = q[2]
            if p[0] == NONE and p[1] == NONE:
                p[1] = q[1]
            else:
                ref[p[0]] = q[1]
            p[0] = q[0]
        if not (p[0] == NONE and p[1] == NONE and p[2] == NONE and p[3] == NONE):
            S.append(p)
        return True

    def remove_back_edges(self, e):
        S, ref, dst = self.stack, self.ref, self.dst
        u = self.src[e]
        hu = self.height[u]
        while S and self._lowest(S[-1]) == hu:
            S.pop()
        if S:
            p = S[-1]
            while p[1] != NONE and dst[p[1]] == u:
                p[1] = ref[p[1]]
            if p[1] == NONE and p[0] != NONE:
                ref[p[0]] = p[2]
                p[0] = NONE
            while p[3] != NONE and dst[p[3]] == u:
                p[3] = ref[p[3]]
            if p[3] == NONE and p[2] != NONE:
                ref[p[2]] = p[0]
                p[2] = NONE
        if self.lowpt[e] < hu:
            top = S[-1]
            hl, hr = top[1], top[3]
            if hl != NONE and (hr == NONE or self.lowpt[hl] > self.lowpt[hr]):
                ref[e] = hl
            else:
                ref[e] = hr

    def run(self):
        roots = []
        for v in range(self.n):
            if self.height[v] == NONE:
                self.height[v] = 0
                roots.append(v)
                self.orient(v)
        key = self.nesting.__getitem__
        for lst in self.out:
            lst.sort(key=key)
        return all(self.test(v) for v in roots)


def is_planar(n, us, vs) -> bool:
    """Left-right planarity test of the simple graph with edges ``(us[k], vs[k])``."""
    m = len(us)
    if n > 2 and m > 3 * n - 6:
        return False
    if sys.getrecursionlimit() < 2 * n + 200:
        sys.setrecursionlimit(2 * n + 200)
    return _LRTest(n, list(map(int, us)), list(map(int, vs))).run()


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def pmfg_select(n, cand_u, cand_v, target):
    """Greedily accept candidates in order while the graph stays planar.

    Returns the accepted candidate positions.  An edge joining two
    components cannot break planarity and skips the test.
    """
    parent = list(range(n))
    us, vs, accepted = [], [], []
    for pos in range(len(cand_u)):
        if len(accepted) >= target:
            break
        a, b = int(cand_u[pos]), int(cand_v[pos])
        ra, rb = _find(parent, a), _find(parent, b)
        us.append(a)
        vs.append(b)
        if ra != rb:
            parent[ra] = rb
        elif not is_planar(n, us, vs):
            us.pop()
            vs.pop()
            continue
        accepted.append(pos)
    return accepted
