"""q-dependent detrended cross-correlation coefficients.

Series are integrated into mean-removed profiles, cut into ``2*floor(l/s)``
boxes (one tiling from each end), detrended box-wise by a degree-``m``
least-squares polynomial, and the box covariances are combined with the
signed power ``sgn(f) |f|**(q/2)`` before normalising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DataError, DegenerateSeriesError
from .seriesio import ReturnPanel

# Boxes whose detrended variance is below (ZERO_BOX_RTOL * max|profile|)**2
# are treated as exactly zero-variance.
ZERO_BOX_RTOL = 1e-12

_PAIR_CHUNK_BYTES = 64 * 2**20


def _frange(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(max(count, 0))]


@dataclass(frozen=True)
class DetrendConfig:
    poly_order: int = 2
    min_scale: int = 30
    max_scale: int = 1000
    scale_step: int = 40
    q_min: float = 0.2
    q_max: float = 5.0
    q_step: float = 0.2

    def __post_init__(self):
        if not 0 <= self.poly_order <= 5:
            raise ConfigError("poly_order must be in 0..5")
        if self.min_scale < self.poly_order + 2:
            raise ConfigError(f"min_scale must be >= poly_order + 2 = {self.poly_order + 2}")
        if self.max_scale < self.min_scale or self.scale_step <= 0:
            raise ConfigError("scale range is empty or step is not positive")
        if self.q_min <= 0:
            raise ConfigError("q values must be > 0")
        if self.q_max < self.q_min or self.q_step <= 0:
            raise ConfigError("q range is empty or step is not positive")

    @property
    def scales(self) -> list[int]:
        return list(range(self.min_scale, self.max_scale + 1, self.scale_step))

    @property
    def qs(self) -> list[float]:
        return _frange(self.q_min, self.q_max, self.q_step)

    def check_length(self, length: int) -> None:
        """Every scale must leave at least 4 boxes per tiling."""
        biggest = self.scales[-1]
        if 4 * biggest > length:
            raise ConfigError(f"largest scale {biggest} exceeds length/4 = {length / 4:g}")


@dataclass
class QCorrMatrix:
    q: float
    s: int
    rho: np.ndarray
    tickers: list[str]
    poly_order: int = 2

    @property
    def n(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class MatrixMoments:
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def profile(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("profile needs a 1-D series of length >= 2")
    return np.cumsum(x - x.mean())


def segment_bounds(length: int, s: int) -> list[tuple[int, int]]:
    """Half-open ``(start, stop)`` boxes: ``floor(l/s)`` from the front, then as many from the back."""
    if s < 2 or s > length:
        raise ConfigError(f"scale {s} outside [2, {length}]")
    m = length // s
    fwd = [(v * s, (v + 1) * s) for v in range(m)]
    bwd = [(length - (v + 1) * s, length - v * s) for v in range(m)]
    return fwd + bwd


@lru_cache(maxsize=256)
def _poly_basis(s: int, m: int) -> np.ndarray:
    """Orthonormal basis (s x (m+1)) of degree-<=m polynomials sampled at i = 1..s."""
    if s <= m + 1:
        raise ConfigError(f"box length {s} too short for degree-{m} fit")
    x = np.linspace(-1.0, 1.0, s)
    q, _ = np.linalg.qr(np.polynomial.legendre.legvander(x, m))
    q.setflags(write=False)
    return q


def _detrend_rows(boxes: np.ndarray, m: int) -> np.ndarray:
    basis = _poly_basis(boxes.shape[-1], m)
    return boxes - (boxes @ basis) @ basis.T


def detrend_residuals(prof, box: tuple[int, int], m: int = 2) -> np.ndarray:
    """Profile minus its least-squares degree-``m`` fit over one box."""
    prof = np.asarray(prof, dtype=float)
    start, stop = box
    return _detrend_rows(prof[start:stop], m)


def box_residuals(prof: np.ndarray, s: int, m: int) -> np.ndarray:
    """Residuals of every box, shape ``(..., 2*M_s, s)``; works on stacked profiles."""
    length = prof.shape[-1]
    segment_bounds(length, s)
    k = length // s
    fwd = prof[..., : k * s].reshape(*prof.shape[:-1], k, s)
    bwd = prof[..., length - k * s :].reshape(*prof.shape[:-1], k, s)[..., ::-1, :]
    return _detrend_rows(np.concatenate([fwd, bwd], axis=-2), m)


def box_cov(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DataError("residual vectors differ in length")
    return float(np.mean(x * y))


def _zero_tol(prof: np.ndarray) -> np.ndarray:
    return (ZERO_BOX_RTOL * np.max(np.abs(prof), axis=-1)) ** 2


def _signed_power(f: np.ndarray, q: float) -> np.ndarray:
    return np.sign(f) * np.abs(f) ** (q / 2.0)


def fluctuation_q(xs, ys, q: float, s: int, m: int = 2) -> tuple[float, float, float]:
    """Return ``(F_xy, F_xx, F_yy)`` of order ``q`` at scale ``s``."""
    if q <= 0:
        raise ConfigError("q must be > 0")
    px, py = profile(xs), profile(ys)
    if px.size != py.size:
        raise DataError("series differ in length")
    rx, ry = box_residuals(px, s, m), box_residuals(py, s, m)
    fxx = np.mean(rx * rx, axis=1)
    fyy = np.mean(ry * ry, axis=1)
    fxy = np.mean(rx * ry, axis=1)
    zero = (fxx <= _zero_tol(px)) | (fyy <= _zero_tol(py))
    fxx = np.where(fxx <= _zero_tol(px), 0.0, fxx)
    fyy = np.where(fyy <= _zero_tol(py), 0.0, fyy)
    fxy = np.where(zero, 0.0, fxy)
    return (
        float(np.mean(_signed_power(fxy, q))),
        float(np.mean(fxx ** (q / 2.0))),
        float(np.mean(fyy ** (q / 2.0))),
    )


def rho_q(xs, ys, q: float, s: int, m: int = 2) -> float:
    fxy, fxx, fyy = fluctuation_q(xs, ys, q, s, m)
    if fxx == 0.0 or fyy == 0.0:
        raise DegenerateSeriesError("degenerate series: zero detrended fluctuation")
    return float(np.clip(fxy / math.sqrt(fxx * fyy), -1.0, 1.0))


def _pair_fluctuations(res: np.ndarray, qs: list[float]) -> np.ndarray:
    """Signed-power box averages for every pair: ``(len(qs), N, N)``.

    ``res`` has shape ``(N, B, s)`` with zero-variance boxes already zeroed.
    """
    n, nbox, s = res.shape
    by_box = np.ascontiguousarray(res.transpose(1, 0, 2))
    by_box_t = by_box.transpose(0, 2, 1)
    halves = np.asarray(qs, dtype=float) / 2.0
    out = np.empty((len(qs), n, n))
    chunk = max(1, _PAIR_CHUNK_BYTES // (8 * nbox * n))
    with np.errstate(divide="ignore"):
        for i0 in range(0, n, chunk):
            i1 = min(n, i0 + chunk)
            f = (by_box[:, i0:i1, :] @ by_box_t) / s
            sign = np.sign(f)
            logabs = np.log(np.abs(f))
            for k, h in enumerate(halves):
                if h == 1.0:
                    out[k, i0:i1] = f.mean(axis=0)
                else:
                    out[k, i0:i1] = (sign * np.exp(h * logabs)).mean(axis=0)
    return out


def _finish(fq: np.ndarray, tickers: list[str], q: float, s: int) -> np.ndarray:
    diag = np.diag(fq).copy()
    bad = np.flatnonzero(diag <= 0.0)
    if bad.size:
        raise DegenerateSeriesError(f"degenerate series {tickers[bad[0]]} at q={q:g}, s={s}")
    rho = fq / np.sqrt(np.outer(diag, diag))
    upper = np.triu(rho, 1)
    rho = upper + upper.T
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def _zeroed_residuals(profiles: np.ndarray, s: int, m: int) -> np.ndarray:
    res = box_residuals(profiles, s, m)
    var = np.mean(res * res, axis=2)
    zero = var <= _zero_tol(profiles)[:, None]
    res[zero] = 0.0
    return res


def _profiles(panel: ReturnPanel) -> np.ndarray:
    x = panel.returns
    return np.cumsum(x - x.mean(axis=1, keepdims=True), axis=1)


def corr_matrix(panel: ReturnPanel, q: float, s: int, config: DetrendConfig | None = None) -> QCorrMatrix:
    config = config or DetrendConfig()
    if q <= 0:
        raise ConfigError("q must be > 0")
    res = _zeroed_residuals(_profiles(panel), s, config.poly_order)
    fq = _pair_fluctuations(res, [q])[0]
    return QCorrMatrix(q, s, _finish(fq, panel.tickers, q, s), list(panel.tickers), config.poly_order)


def corr_grid(
    panel: ReturnPanel,
    config: DetrendConfig | None = None,
    qs: list[float] | None = None,
    scales: list[int] | None = None,
) -> dict[tuple[float, int], QCorrMatrix]:
    """All matrices of a (q, s) grid, keyed ``(q, s)``.

    Box residuals and box covariances are computed once per scale and shared
    by every q.
    """
    config = config or DetrendConfig()
    qs = config.qs if qs is None else list(qs)
    scales = config.scales if scales is None else list(scales)
    if any(q <= 0 for q in qs):
        raise ConfigError("q values must be > 0")
    profiles = _profiles(panel)
    out: dict[tuple[float, int], QCorrMatrix] = {}
    for s in scales:
        res = _zeroed_residuals(profiles, s, config.poly_order)
        fqs = _pair_fluctuations(res, qs)
        for q, fq in zip(qs, fqs):
            out[(q, s)] = QCorrMatrix(q, s, _finish(fq, panel.tickers, q, s), list(panel.tickers), config.poly_order)
    return dict(sorted(out.items()))


def upper_entries(matrix) -> np.ndarray:
    rho = matrix.rho if isinstance(matrix, QCorrMatrix) else np.asarray(matrix)
    return rho[np.triu_indices(rho.shape[0], 1)]


def matrix_moments(matrix) -> MatrixMoments:
    """Mean, population variance, skewness and raw kurtosis of the off-diagonal entries.

    Skewness and kurtosis are NaN when the entries have zero variance.
    """
    x = upper_entries(matrix)
    if x.size < 3:
        raise DataError("moments need N >= 3")
    mean = float(x.mean())
    d = x - mean
    var = float(np.mean(d * d))
    if var <= 1e-15 * max(1.0, mean * mean):
        return MatrixMoments(mean, 0.0, math.nan, math.nan)
    skew = float(np.mean(d**3) / var**1.5)
    kurt = float(np.mean(d**4) / var**2)
    return MatrixMoments(mean, var, skew, kurt)
