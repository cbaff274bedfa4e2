"""Random-matrix benchmarks for correlation spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigError, DataError, DegenerateSeriesError
from .qdcca import QCorrMatrix
from .seriesio import ReturnPanel


@dataclass(frozen=True)
class MpBounds:
    q_ratio: float
    lambda_minus: float
    lambda_plus: float


@dataclass
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]

    @property
    def n(self) -> int:
        return self.eigenvalues.size


@dataclass
class SectorProjection:
    groups: list[int]
    weights: np.ndarray  # G x N

    @property
    def sizes(self) -> np.ndarray:
        return np.count_nonzero(self.weights, axis=1)


def _rho(matrix) -> np.ndarray:
    return matrix.rho if isinstance(matrix, QCorrMatrix) else np.asarray(matrix, dtype=float)


def pearson_matrix(panel: ReturnPanel | np.ndarray) -> np.ndarray:
    """``R R^T / L`` over rows standardised to zero mean and unit variance."""
    r = panel.returns if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=float)
    sd = r.std(axis=1)
    if np.any(sd == 0):
        raise DegenerateSeriesError(f"constant row {int(np.flatnonzero(sd == 0)[0])}")
    z = (r - r.mean(axis=1, keepdims=True)) / sd[:, None]
    c = z @ z.T / r.shape[1]
    upper = np.triu(c, 1)
    c = upper + upper.T
    np.fill_diagonal(c, 1.0)
    return c


def mp_bounds(n: int, length: int) -> MpBounds:
    if length <= n:
        raise ConfigError(f"need L > N for Marchenko-Pastur bounds (L={length}, N={n})")
    q = length / n
    root = 2.0 * math.sqrt(1.0 / q)
    return MpBounds(q, 1.0 + 1.0 / q - root, 1.0 + 1.0 / q + root)


def mp_density(lam, bounds: MpBounds):
    lam = np.asarray(lam, dtype=float)
    lo, hi = bounds.lambda_minus, bounds.lambda_plus
    inside = (lam > lo) & (lam < hi)
    safe = np.where(inside, lam, 1.0)
    dens = bounds.q_ratio / (2 * math.pi) * np.sqrt(np.clip((hi - safe) * (safe - lo), 0, None)) / safe
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def eig_sym(matrix, atol: float = 1e-10) -> EigenSystem:
    """Ascending eigenpairs; each eigenvector's largest-magnitude entry is made positive."""
    c = _rho(matrix)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DataError("matrix must be square")
    if np.max(np.abs(c - c.T), initial=0.0) > atol:
        raise DataError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh((c + c.T) / 2)
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return EigenSystem(vals, vecs * signs)


def classify_eigenvalues(es: EigenSystem, bounds: MpBounds) -> tuple[np.ndarray, np.ndarray]:
    """Split eigen indices into (bulk, deviating) using the analytic edges."""
    lam = es.eigenvalues
    dev = (lam > bounds.lambda_plus) | (lam < bounds.lambda_minus)
    return np.flatnonzero(~dev), np.flatnonzero(dev)


def ipr(es: EigenSystem) -> np.ndarray:
    return np.sum(es.eigenvectors**4, axis=0)


def participation_ratio(es: EigenSystem) -> np.ndarray:
    return 1.0 / ipr(es)


def sector_projection(tickers: list[str], groups: dict[str, int]) -> SectorProjection:
    missing = [t for t in tickers if t not in groups]
    if missing:
        raise DataError(f"assets missing from every group: {missing[:5]}")
    labels = sorted({int(groups[t]) for t in tickers})
    row = {g: k for k, g in enumerate(labels)}
    weights = np.zeros((len(labels), len(tickers)))
    for i, t in enumerate(tickers):
        weights[row[int(groups[t])], i] = 1.0
    weights /= weights.sum(axis=1, keepdims=True)
    return SectorProjection(labels, weights)


def sector_contributions(es: EigenSystem, proj: SectorProjection, k: int) -> np.ndarray:
    """Group-averaged squared components of eigenvector ``k``."""
    if proj.weights.shape[1] != es.n:
        raise DataError("projection does not cover all assets")
    if np.any(proj.weights.sum(axis=0) <= 0):
        raise DataError("asset missing from all groups")
    return proj.weights @ es.eigenvectors[:, k] ** 2


def deflate_market_mode(matrix, es: EigenSystem) -> np.ndarray:
    """Remove the largest eigenvalue's rank-one component."""
    u = es.eigenvectors[:, -1]
    out = _rho(matrix) - es.eigenvalues[-1] * np.outer(u, u)
    return (out + out.T) / 2


def deflated_system(matrix, es: EigenSystem | None = None) -> EigenSystem:
    """Eigensystem recomputed after the market mode has been deflated away.

    The removed mode reappears with eigenvalue ~0 at the bottom of the
    ascending order, so index ``N`` is now the strongest non-market mode.
    """
    rho = _rho(matrix)
    es = es if es is not None else eig_sym(rho)
    return eig_sym(deflate_market_mode(rho, es))


def spectrum_histogram(values, bin_width: float = 0.05, lo: float = 0.0, hi: float = 2.0):
    """Fixed-width density histogram; returns ``(edges, density)``."""
    edges = np.linspace(lo, hi, int(round((hi - lo) / bin_width)) + 1)
    values = np.asarray(values, dtype=float)
    counts, _ = np.histogram(values, bins=edges)
    total = values.size
    dens = counts / (total * bin_width) if total else counts.astype(float)
    return edges, dens


def ks_distance(a, b) -> float:
    return float(stats.ks_2samp(np.asarray(a), np.asarray(b)).statistic)
