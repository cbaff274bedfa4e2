"""Slow, loop-based reference implementations used as test oracles.

None of these call into qcorrnet, so agreement is evidence rather than
tautology.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def dcca_rho(x, y, s: int, order: int = 2) -> float:
    """DCCA coefficient from explicit loops and np.polyfit.

    Boxes are non-overlapping windows of length ``s`` laid from the start
    and again from the end of the profile.
    """
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    px, py = [], []
    ax = ay = 0.0
    for k in range(n):
        ax += x[k] - mx
        ay += y[k] - my
        px.append(ax)
        py.append(ay)
    nb = n // s
    starts = [v * s for v in range(nb)] + [n - (v + 1) * s for v in range(nb)]
    idx = np.arange(1, s + 1, dtype=float)
    fxy = fxx = fyy = 0.0
    for a in starts:
        bx = np.array(px[a : a + s])
        by = np.array(py[a : a + s])
        rx = bx - np.polyval(np.polyfit(idx, bx, order), idx)
        ry = by - np.polyval(np.polyfit(idx, by, order), idx)
        cxy = cxx = cyy = 0.0
        for i in range(s):
            cxy += rx[i] * ry[i]
            cxx += rx[i] * rx[i]
            cyy += ry[i] * ry[i]
        fxy += cxy / s
        fxx += cxx / s
        fyy += cyy / s
    return fxy / math.sqrt(fxx * fyy)


def normal_equation_fit(values, order: int):
    """Least-squares polynomial on i = 1..s by solving the normal equations directly."""
    s = len(values)
    i = np.arange(1, s + 1, dtype=float)
    # centre and scale the abscissa so the Gram matrix stays well conditioned
    t = (i - i.mean()) / (s / 2.0)
    v = np.vstack([t**k for k in range(order + 1)]).T
    coef = np.linalg.solve(v.T @ v, v.T @ np.asarray(values, dtype=float))
    return v @ coef


def grid_search_weights(cov, mean, tau: float, span: float = 2.0, step: float = 2e-3):
    """Brute-force minimiser of w'Sw - tau R'w over the 3-asset budget plane."""
    cov = np.asarray(cov)
    mean = np.asarray(mean)
    grid = np.arange(-span, span + step / 2, step)
    w1, w2 = np.meshgrid(grid, grid, indexing="ij")
    w3 = 1.0 - w1 - w2
    w = np.stack([w1, w2, w3], axis=-1)
    obj = np.einsum("...i,ij,...j->...", w, cov, w) - tau * (w @ mean)
    k = np.unravel_index(np.argmin(obj), obj.shape)
    best = w[k]
    # refine around the coarse optimum
    fine = np.arange(-step, step + step / 200, step / 100)
    f1, f2 = np.meshgrid(best[0] + fine, best[1] + fine, indexing="ij")
    f3 = 1.0 - f1 - f2
    fw = np.stack([f1, f2, f3], axis=-1)
    obj = np.einsum("...i,ij,...j->...", fw, cov, fw) - tau * (fw @ mean)
    k = np.unravel_index(np.argmin(obj), obj.shape)
    return fw[k]


def brute_force_planar(n: int, edges) -> bool:
    """Planarity of a tiny graph by exhaustive K5 / K3,3 minor search.

    Every vertex is assigned to one of ``k`` branch sets or discarded; a
    minor exists when all branch sets are connected and the contracted
    graph contains the target.  Exponential, so keep ``n`` at 6 or so.
    """
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    if n >= 3 and len(edges) > 3 * n - 6:
        return False

    def connected(vs):
        vs = set(vs)
        start = next(iter(vs))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v] & vs:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vs

    for k in (5, 6):
        if n < k:
            continue
        for labels in itertools.product(range(k + 1), repeat=n):
            branch = [[v for v in range(n) if labels[v] == b] for b in range(k)]
            if any(not bs for bs in branch) or any(not connected(bs) for bs in branch):
                continue
            links = set()
            for a, b in edges:
                la, lb = labels[a], labels[b]
                if la < k and lb < k and la != lb:
                    links.add((min(la, lb), max(la, lb)))
            if k == 5 and len(links) == 10:
                return False
            if k == 6:
                for side in itertools.combinations(range(1, 6), 2):
                    left = (0, *side)
                    right = [v for v in range(6) if v not in left]
                    if all((min(a, b), max(a, b)) in links for a in left for b in right):
                        return False
    return True
