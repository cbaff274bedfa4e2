"""Planar maximally filtered graphs and their topology metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import DataError
from .planarity import pmfg_select
from .qdcca import QCorrMatrix


@dataclass
class PmfgGraph:
    n: int
    edges: list[tuple[int, int, float]]
    labels: list[str]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges, weight="rho")
        return g

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class TopologyReport:
    clustering: float
    path_length: float
    heterogeneity: float
    assortativity: float


def _matrix(matrix) -> tuple[np.ndarray, list[str]]:
    if isinstance(matrix, QCorrMatrix):
        return matrix.rho, list(matrix.tickers)
    rho = np.asarray(matrix, dtype=float)
    return rho, [str(i) for i in range(rho.shape[0])]


def ranked_candidates(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle pairs by descending weight, ties broken by (i, j)."""
    iu, ju = np.triu_indices(rho.shape[0], 1)
    order = np.lexsort((ju, iu, -rho[iu, ju]))
    return iu[order], ju[order]


def build_pmfg(matrix) -> PmfgGraph:
    rho, labels = _matrix(matrix)
    n = rho.shape[0]
    if n < 3:
        raise DataError("PMFG needs at least 3 nodes")
    if rho.shape != (n, n) or not np.allclose(rho, rho.T, atol=1e-10, rtol=0):
        raise DataError("PMFG needs a symmetric square matrix")
    cu, cv = ranked_candidates(rho)
    target = 3 * (n - 2)
    picked = pmfg_select(n, cu, cv, target)
    if len(picked) != target:
        raise DataError(f"PMFG stopped at {len(picked)} of {target} edges")
    edges = [(int(cu[p]), int(cv[p]), float(rho[cu[p], cv[p]])) for p in picked]
    return PmfgGraph(n, edges, labels)


def _graph(g) -> nx.Graph:
    return g.to_networkx() if isinstance(g, PmfgGraph) else g


def clustering_coefficient(g) -> float:
    return float(nx.average_clustering(_graph(g)))


def avg_shortest_path(g, weighted: bool = False) -> float:
    """Mean shortest path over node pairs; hop counts unless ``weighted``.

    The weighted variant uses the metric distance ``sqrt(2 (1 - rho))``.
    """
    graph = _graph(g)
    if not nx.is_connected(graph):
        raise DataError("shortest paths undefined on a disconnected graph")
    if weighted:
        graph = with_distances(graph)
        return float(nx.average_shortest_path_length(graph, weight="dist"))
    return float(nx.average_shortest_path_length(graph))


def with_distances(graph: nx.Graph) -> nx.Graph:
    h = graph.copy()
    for _, _, d in h.edges(data=True):
        d["dist"] = math.sqrt(max(0.0, 2.0 * (1.0 - d.get("rho", 1.0))))
    return h


def heterogeneity_index(g) -> float:
    graph = _graph(g)
    n = graph.number_of_nodes()
    if n < 3:
        raise DataError("heterogeneity needs n >= 3")
    deg = dict(graph.degree())
    if any(d == 0 for d in deg.values()):
        raise DataError("heterogeneity undefined with isolated nodes")
    total = sum(1.0 / math.sqrt(deg[a] * deg[b]) for a, b in graph.edges())
    return (n - 2.0 * total) / (n - 2.0 * math.sqrt(n - 1))


def assortativity(g) -> float:
    """Newman degree assortativity; NaN when endpoint degrees have no variance."""
    graph = _graph(g)
    deg = dict(graph.degree())
    pairs = np.array([(deg[a], deg[b]) for a, b in graph.edges()], dtype=float)
    if len(pairs) < 2:
        return math.nan
    # each edge counted in both directions
    x = np.concatenate([pairs[:, 0], pairs[:, 1]])
    y = np.concatenate([pairs[:, 1], pairs[:, 0]])
    sx = x.std()
    if sx <= 1e-12 * max(1.0, abs(x.mean())):
        return math.nan
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * y.std()))


def topology(g) -> TopologyReport:
    return TopologyReport(
        clustering_coefficient(g),
        avg_shortest_path(g),
        heterogeneity_index(g),
        assortativity(g),
    )


def maximum_spanning_tree(matrix) -> set[tuple[int, int]]:
    rho, _ = _matrix(matrix)
    n = rho.shape[0]
    full = nx.Graph()
    full.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            full.add_edge(i, j, weight=float(rho[i, j]))
    tree = nx.maximum_spanning_tree(full, algorithm="kruskal")
    return {(min(a, b), max(a, b)) for a, b in tree.edges()}


def contains_mst(g: PmfgGraph, matrix) -> bool:
    have = {(min(i, j), max(i, j)) for i, j, _ in g.edges}
    return maximum_spanning_tree(matrix) <= have


def write_edges(g: PmfgGraph, path) -> None:
    from .exports import write_rows

    write_rows(
        path,
        ["i", "j", "ticker_i", "ticker_j", "rho"],
        ((i, j, g.labels[i], g.labels[j], w) for i, j, w in g.edges),
    )
