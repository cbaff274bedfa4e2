"""Planarity testing with certificates.

The boolean test used inside PMFG construction runs on the left-right kernel:
the compiled ``_lr_core`` extension when it imports, otherwise the pure-Python
``_lr_py``.  Set ``QCORRNET_PURE_PYTHON=1`` to force the fallback.

Certificates (a combinatorial embedding, or a Kuratowski subgraph) come from
networkx and are checked here by code that shares nothing with either kernel:
face tracing plus Euler's formula for embeddings, and degree-2 smoothing to
K5 / K3,3 for obstructions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import networkx as nx

from . import _lr_py

if os.environ.get("QCORRNET_PURE_PYTHON"):
    _kernel = _lr_py
else:
    try:
        from . import _lr_core as _kernel
    except ImportError:  # pragma: no cover - depends on build
        _kernel = _lr_py

BACKEND = "cython" if _kernel is not _lr_py else "python"


def kernel_is_planar(n: int, us, vs) -> bool:
    return bool(_kernel.is_planar(n, us, vs))


def pmfg_select(n: int, cand_u, cand_v, target: int) -> list[int]:
    return list(_kernel.pmfg_select(n, cand_u, cand_v, target))


@dataclass
class PlanarityResult:
    planar: bool
    embedding: nx.PlanarEmbedding | None = None
    witness: nx.Graph | None = None

    def __bool__(self):
        return self.planar


def _as_graph(g) -> nx.Graph:
    if isinstance(g, nx.Graph):
        return g
    if hasattr(g, "to_networkx"):
        return g.to_networkx()
    return nx.Graph(list(g))


def is_planar(g) -> PlanarityResult:
    """Planarity with certificate: embedding when planar, Kuratowski subgraph otherwise."""
    graph = _as_graph(g)
    planar, cert = nx.check_planarity(graph, counterexample=True)
    if planar:
        return PlanarityResult(True, embedding=cert)
    return PlanarityResult(False, witness=cert)


def _faces(rotation: dict) -> int:
    """Count faces of a rotation system (clockwise neighbour lists)."""
    succ = {}
    for v, nbrs in rotation.items():
        d = len(nbrs)
        for k, w in enumerate(nbrs):
            succ[(v, w)] = nbrs[(k + 1) % d]
    seen = set()
    faces = 0
    for start in succ:
        if start in seen:
            continue
        faces += 1
        v, w = start
        while (v, w) not in seen:
            seen.add((v, w))
            # next half-edge of the face: leave w along the successor of v in w's rotation
            v, w = w, succ[(w, v)]
    return faces


def verify_embedding(graph, embedding) -> bool:
    """Check that ``embedding`` is a planar rotation system of ``graph``."""
    graph = _as_graph(graph)
    rotation = {v: list(embedding.neighbors_cw_order(v)) for v in embedding.nodes}
    for v in graph.nodes:
        nbrs = rotation.get(v, [])
        if len(nbrs) != len(set(nbrs)) or set(nbrs) != set(graph[v]):
            return False
    for comp in nx.connected_components(graph):
        if len(comp) < 2:
            continue
        sub = {v: rotation[v] for v in comp}
        e = sum(len(nb) for nb in sub.values()) // 2
        if len(comp) - e + _faces(sub) != 2:
            return False
    return True


def _smooth(witness: nx.Graph) -> nx.MultiGraph | None:
    h = nx.MultiGraph(witness)
    h.remove_nodes_from([v for v in list(h) if h.degree(v) == 0])
    changed = True
    while changed:
        changed = False
        for v in list(h):
            if h.degree(v) == 2 and h.number_of_edges(v, v) == 0:
                a, b = [w for _, w in h.edges(v)]
                h.remove_node(v)
                h.add_edge(a, b)
                changed = True
    return h


def verify_kuratowski(graph, witness) -> bool:
    """True when ``witness`` is a subgraph of ``graph`` homeomorphic to K5 or K3,3."""
    graph = _as_graph(graph)
    if any(not graph.has_edge(a, b) for a, b in witness.edges):
        return False
    h = _smooth(witness)
    if any(h.number_of_edges(a, b) > 1 or a == b for a, b in h.edges()):
        return False
    simple = nx.Graph(h)
    degrees = sorted(d for _, d in simple.degree())
    if degrees == [4] * 5 and simple.number_of_edges() == 10:
        return True
    if degrees == [3] * 6 and simple.number_of_edges() == 9 and nx.is_bipartite(simple):
        sides = nx.bipartite.sets(simple)
        return all(len(s) == 3 for s in sides)
    return False


def verify_certificate(graph, result: PlanarityResult) -> bool:
    if result.planar:
        return result.embedding is not None and verify_embedding(graph, result.embedding)
    return result.witness is not None and verify_kuratowski(graph, result.witness)
