"""Composite network centrality, portfolio selection and mean-variance frontiers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy import linalg
from scipy.sparse import csgraph
from scipy.stats import rankdata

from .errors import ConfigError, DataError, DegenerateCovarianceError
from .pmfg import PmfgGraph, build_pmfg, with_distances
from .qdcca import QCorrMatrix
from .seriesio import ReturnPanel

MODES = ("peripheral", "central", "random")

# first group is averaged over 4 ranks, second over 6
_GROUP_A = ("degree_w", "degree_u", "betweenness_w", "betweenness_u")
_GROUP_B = ("eccentricity_w", "eccentricity_u", "closeness_w", "closeness_u", "eigenvector_w", "eigenvector_u")


@dataclass
class CentralityScores:
    ranks: dict[str, np.ndarray]
    eta: np.ndarray

    @property
    def n(self) -> int:
        return self.eta.size


@dataclass(frozen=True)
class FrontierPoint:
    tau: float
    risk: float
    ret: float


@dataclass
class DeltaCurve:
    qs: list[float]
    delta: list[float]
    peripheral: list[float]
    central: list[float]
    risk_level: float
    per_point: dict = field(default_factory=dict, repr=False)


def _stable_round(values: np.ndarray) -> np.ndarray:
    # collapse float noise so symmetric nodes tie exactly
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    return np.round(values / scale, 9)


def _principal_vector(adj: np.ndarray) -> np.ndarray:
    _, vecs = np.linalg.eigh(adj)
    return np.abs(vecs[:, -1])


def centrality_metrics(g: PmfgGraph | nx.Graph) -> dict[str, np.ndarray]:
    """Raw centrality values oriented so that larger means more central."""
    graph = g.to_networkx() if isinstance(g, PmfgGraph) else g
    if not nx.is_connected(graph):
        raise DataError("centrality needs a connected graph")
    nodes = sorted(graph.nodes)
    graph = with_distances(graph)
    n = len(nodes)

    def vec(d):
        return np.array([d[v] for v in nodes], dtype=float)

    adj_u = nx.to_numpy_array(graph, nodelist=nodes, weight=None)
    adj_w = nx.to_numpy_array(graph, nodelist=nodes, weight="rho")
    adj_d = nx.to_numpy_array(graph, nodelist=nodes, weight="dist", nonedge=np.inf)
    shifted = np.where(adj_u > 0, (1.0 + adj_w) / 2.0, 0.0)
    hops = csgraph.shortest_path(adj_u, method="D", unweighted=True)
    # zero-length edges (rho == 1) must stay edges for csgraph
    dist = csgraph.shortest_path(np.where(np.isinf(adj_d), 0.0, np.maximum(adj_d, 1e-300)), method="D")
    out = {
        "degree_w": adj_w.sum(axis=1),
        "degree_u": adj_u.sum(axis=1),
        "betweenness_w": vec(nx.betweenness_centrality(graph, weight="dist")),
        "betweenness_u": vec(nx.betweenness_centrality(graph)),
        "eccentricity_w": -dist.max(axis=1),
        "eccentricity_u": -hops.max(axis=1),
        "closeness_w": (n - 1) / dist.sum(axis=1),
        "closeness_u": (n - 1) / hops.sum(axis=1),
        "eigenvector_w": _principal_vector(shifted),
        "eigenvector_u": _principal_vector(adj_u),
    }
    assert all(v.size == n for v in out.values())
    return out


def centrality_eta(g: PmfgGraph | nx.Graph, ties: str = "average") -> CentralityScores:
    """Composite rank score in [0, 2]; rank N is the most central node for every metric.

    ``ties`` is passed to :func:`scipy.stats.rankdata` ("average" or "min").
    """
    metrics = centrality_metrics(g)
    ranks = {k: rankdata(_stable_round(v), method=ties) for k, v in metrics.items()}
    n = next(iter(ranks.values())).size
    a = sum(ranks[k] for k in _GROUP_A)
    b = sum(ranks[k] for k in _GROUP_B)
    eta = (a - 4) / (4 * (n - 1)) + (b - 6) / (6 * (n - 1))
    return CentralityScores(ranks, eta)


def select_portfolio(scores: CentralityScores, m: int, mode: str, seed: int = 0) -> list[int]:
    """Indices of the ``m`` lowest-eta, highest-eta or uniformly random nodes."""
    n = scores.n
    if m > n or m < 1:
        raise ConfigError(f"portfolio size {m} outside 1..{n}")
    idx = np.arange(n)
    if mode == "peripheral":
        chosen = np.lexsort((idx, scores.eta))[:m]
    elif mode == "central":
        chosen = np.lexsort((idx, -scores.eta))[:m]
    elif mode == "random":
        chosen = np.random.default_rng(seed).choice(n, size=m, replace=False)
    else:
        raise ConfigError(f"unknown selection mode {mode!r}")
    return sorted(int(i) for i in chosen)


class MeanVariance:
    """Closed-form budget-constrained mean-variance solutions for one asset set.

    With ``w_mv`` the minimum-variance weights and ``d`` the zero-sum tilt,
    the optimum at risk tolerance ``tau`` is ``w_mv + tau * d`` and its
    variance is ``risk_mv + tau**2 * d' S d``.
    """

    def __init__(self, cov, expret):
        cov = np.asarray(cov, dtype=float)
        expret = np.asarray(expret, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] != expret.size:
            raise DataError("covariance/return shapes disagree")
        cov = (cov + cov.T) / 2
        vals, vecs = np.linalg.eigh(cov)
        if vals[0] <= 1e-12 * max(vals[-1], 0.0) or vals[0] <= 0:
            raise DegenerateCovarianceError(
                f"degenerate covariance: near-null direction {np.round(vecs[:, 0], 4).tolist()}",
                direction=vecs[:, 0],
            )
        self.cov = cov
        self.expret = expret
        factor = linalg.cho_factor(cov)
        ones = np.ones(expret.size)
        inv_one = linalg.cho_solve(factor, ones)
        inv_r = linalg.cho_solve(factor, expret)
        a = ones @ inv_one
        self.w_mv = inv_one / a
        self.tilt = (inv_r - (ones @ inv_r) / a * inv_one) / 2.0
        self.risk_mv = float(self.w_mv @ cov @ self.w_mv)
        self.tilt_var = float(self.tilt @ cov @ self.tilt)

    def weights(self, tau: float) -> np.ndarray:
        if tau < 0:
            raise ConfigError("risk tolerance must be >= 0")
        return self.w_mv + tau * self.tilt

    def risk(self, w: np.ndarray) -> float:
        return float(w @ self.cov @ w)

    def tau_for_risk(self, level: float) -> float:
        excess = level - self.risk_mv
        if excess < -1e-12 * max(self.risk_mv, 1e-300):
            raise ConfigError(f"risk level {level:g} below minimum variance {self.risk_mv:g}")
        if self.tilt_var <= 0:
            return 0.0
        return math.sqrt(max(excess, 0.0) / self.tilt_var)


def markowitz_weights(cov, expret, tau: float) -> np.ndarray:
    """Minimiser of ``w'Sw - tau R'w`` subject to ``sum(w) = 1`` (shorts allowed)."""
    return MeanVariance(cov, expret).weights(tau)


def _moments(panel: ReturnPanel, members, train_fraction: float | None = None):
    """Covariance, mean and per-asset total return for ``members``.

    With ``train_fraction`` the first part of the window estimates the
    moments and totals are taken over the remainder (out of sample).
    """
    members = list(members)
    if len(members) < 2:
        raise ConfigError("portfolio needs at least 2 members")
    r = panel.returns[members]
    if train_fraction is None:
        return np.cov(r, ddof=1), r.mean(axis=1), r.sum(axis=1)
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must lie in (0, 1)")
    cut = int(round(train_fraction * r.shape[1]))
    if cut < 2 or cut >= r.shape[1]:
        raise ConfigError("train/test split leaves an empty window")
    train, test = r[:, :cut], r[:, cut:]
    return np.cov(train, ddof=1), train.mean(axis=1), test.sum(axis=1)


def frontier(panel: ReturnPanel, members, tau_grid, train_fraction: float | None = None) -> list[FrontierPoint]:
    """Efficient frontier of ``members``: variance and cumulative return per tau."""
    cov, mean, total = _moments(panel, members, train_fraction)
    mv = MeanVariance(cov, mean)
    points = []
    for tau in tau_grid:
        w = mv.weights(float(tau))
        points.append(FrontierPoint(float(tau), mv.risk(w), float(total @ w)))
    return sorted(points, key=lambda p: (p.risk, p.tau))


def min_variance_risk(panel: ReturnPanel, members, train_fraction: float | None = None) -> float:
    cov, mean, _ = _moments(panel, members, train_fraction)
    return MeanVariance(cov, mean).risk_mv


def return_at_risk(panel: ReturnPanel, members, level: float, train_fraction: float | None = None) -> float:
    """Cumulative return of the frontier portfolio whose variance equals ``level``."""
    cov, mean, total = _moments(panel, members, train_fraction)
    mv = MeanVariance(cov, mean)
    return float(total @ mv.weights(mv.tau_for_risk(level)))


def random_frontier(
    panel: ReturnPanel, m: int, tau_grid, seed: int = 0, draws: int = 100, train_fraction: float | None = None
) -> list[FrontierPoint]:
    """Frontier averaged pointwise over ``draws`` random ``m``-subsets."""
    n = panel.n_assets
    if m > n:
        raise ConfigError(f"portfolio size {m} exceeds {n} assets")
    children = np.random.SeedSequence(int(seed)).spawn(draws)
    taus = [float(t) for t in tau_grid]
    risk = np.zeros(len(taus))
    ret = np.zeros(len(taus))
    for child in children:
        members = sorted(np.random.default_rng(child).choice(n, size=m, replace=False).tolist())
        pts = {p.tau: p for p in frontier(panel, members, taus, train_fraction)}
        risk += [pts[t].risk for t in taus]
        ret += [pts[t].ret for t in taus]
    out = [FrontierPoint(t, r / draws, v / draws) for t, r, v in zip(taus, risk, ret)]
    return sorted(out, key=lambda p: (p.risk, p.tau))


def network_selections(matrix: QCorrMatrix, m: int) -> dict[str, list[int]]:
    scores = centrality_eta(build_pmfg(matrix))
    return {
        "peripheral": select_portfolio(scores, m, "peripheral"),
        "central": select_portfolio(scores, m, "central"),
    }


def delta_curve(
    panel: ReturnPanel,
    matrices: dict[tuple[float, int], QCorrMatrix],
    m: int,
    risk_level: float | None = None,
    q_list: list[float] | None = None,
    selections: dict | None = None,
    train_fraction: float | None = None,
) -> DeltaCurve:
    """Peripheral-minus-central return at one risk level, averaged over scales per q.

    Without ``risk_level`` the level is 1.1 x the largest minimum-variance
    risk among all selected portfolios, so every point is feasible.
    ``selections`` may carry precomputed ``{(q, s): {mode: members}}``.
    """
    keys = sorted(matrices)
    if q_list is not None:
        wanted = {round(float(q), 10) for q in q_list}
        keys = [k for k in keys if round(k[0], 10) in wanted]
    if not keys:
        raise ConfigError("no (q, s) matrices selected for the delta curve")
    if selections is None:
        selections = {}
    for key in keys:
        if key not in selections:
            selections[key] = network_selections(matrices[key], m)

    if risk_level is None:
        floor = max(
            min_variance_risk(panel, sel[mode], train_fraction) for sel in (selections[k] for k in keys) for mode in ("peripheral", "central")
        )
        risk_level = 1.1 * floor

    per_point = {}
    for key in keys:
        phi = {}
        for mode in ("peripheral", "central"):
            try:
                phi[mode] = return_at_risk(panel, selections[key][mode], risk_level, train_fraction)
            except ConfigError as exc:
                raise ConfigError(f"q={key[0]:g}, s={key[1]}: {exc}") from None
        per_point[key] = phi

    qs = sorted({k[0] for k in keys})
    periph, cent = [], []
    for q in qs:
        pts = [per_point[k] for k in keys if k[0] == q]
        periph.append(float(np.mean([p["peripheral"] for p in pts])))
        cent.append(float(np.mean([p["central"] for p in pts])))
    delta = [p - c for p, c in zip(periph, cent)]
    return DeltaCurve(qs, delta, periph, cent, float(risk_level), per_point)
