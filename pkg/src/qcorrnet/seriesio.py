"""Price/return panels, CSV ingest and the two reference models.

Reference panels come in two flavours: a per-row shuffle of the observed
returns (kills temporal and cross structure, keeps marginals) and an
i.i.d. standard-normal panel of the same shape.  Every stochastic routine
derives one child stream per row from the seed, so output does not depend
on evaluation order.
"""

from __future__ import annotations

import csv
import datetime as _dt
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass
class PricePanel:
    tickers: list[str]
    dates: list[str]
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        if self.prices.ndim != 2:
            raise DataError("price matrix must be two-dimensional")
        n, t = self.prices.shape
        if n < 2 or t < 2:
            raise DataError(f"need at least 2 assets and 2 dates, got {n}x{t}")
        if len(self.tickers) != n or len(self.dates) != t:
            raise DataError("labels do not match price matrix shape")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise DataError("non-positive price")

    @property
    def n_assets(self) -> int:
        return self.prices.shape[0]


@dataclass
class ReturnPanel:
    tickers: list[str]
    returns: np.ndarray
    groups: dict[str, int] | None = None
    dates: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2:
            raise DataError("return matrix must be two-dimensional")
        if len(self.tickers) != self.returns.shape[0]:
            raise DataError("ticker count does not match return rows")
        if self.dates is not None and len(self.dates) != self.returns.shape[1]:
            raise DataError("date count does not match return columns")
        if self.groups is not None:
            missing = [t for t in self.tickers if t not in self.groups]
            if missing:
                raise DataError(f"tickers without industry group: {missing[:5]}")
            if any(int(g) < 1 for g in self.groups.values()):
                raise DataError("group indices must be >= 1")

    @property
    def n_assets(self) -> int:
        return self.returns.shape[0]

    @property
    def length(self) -> int:
        return self.returns.shape[1]

    def subset(self, rows) -> "ReturnPanel":
        rows = list(rows)
        tickers = [self.tickers[i] for i in rows]
        groups = None if self.groups is None else {t: self.groups[t] for t in tickers}
        return ReturnPanel(tickers, self.returns[rows], groups, self.dates)


def _row_rngs(seed: int, n: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def load_prices(path: str | Path) -> PricePanel:
    """Read a wide ``date,T1,T2,...`` CSV of positive prices.

    Date rows containing an empty cell are dropped (never imputed); ragged
    rows, unparsable numbers and non-positive prices raise :class:`DataError`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0].lower() != "date":
            raise DataError(f"{path}: malformed header, expected 'date,<ticker>,...'")
        tickers = header[1:]
        if any(not t for t in tickers) or len(set(tickers)) != len(tickers):
            raise DataError(f"{path}: malformed header, empty or duplicate ticker")

        dates, rows = [], []
        dropped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: ragged row ({len(row)} cells, expected {len(header)})")
            cells = [c.strip() for c in row]
            if any(c == "" for c in cells[1:]):
                dropped += 1
                continue
            try:
                _dt.date.fromisoformat(cells[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad date {cells[0]!r}") from None
            try:
                values = [float(c) for c in cells[1:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparsable price") from None
            if any(not (v > 0) or not np.isfinite(v) for v in values):
                raise DataError(f"{path}:{lineno}: non-positive price")
            dates.append(cells[0])
            rows.append(values)

    if dropped:
        log.warning("%s: dropped %d date rows with missing cells", path, dropped)
    if len(tickers) < 2 or len(rows) < 2:
        raise DataError(f"{path}: need at least 2 assets and 2 dates")
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise DataError(f"{path}: dates are not strictly increasing")
    return PricePanel(tickers, dates, np.array(rows, dtype=float).T)


def load_groups(path: str | Path) -> dict[str, int]:
    """Read a ``ticker,group`` CSV into a ticker -> group index map."""
    path = Path(path)
    groups: dict[str, int] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header[:2] != ["ticker", "group"]:
            raise DataError(f"{path}: malformed header, expected 'ticker,group'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                g = int(row[1])
            except (IndexError, ValueError):
                raise DataError(f"{path}:{lineno}: bad group index") from None
            if g < 1:
                raise DataError(f"{path}:{lineno}: group index must be >= 1")
            ticker = row[0].strip()
            if ticker in groups:
                raise DataError(f"{path}:{lineno}: duplicate ticker {ticker}")
            groups[ticker] = g
    return groups


def log_returns(panel: PricePanel, groups: dict[str, int] | None = None) -> ReturnPanel:
    logp = np.log(panel.prices)
    return ReturnPanel(list(panel.tickers), np.diff(logp, axis=1), groups, list(panel.dates[1:]))


def shuffle_panel(panel: ReturnPanel, seed: int) -> ReturnPanel:
    """Independently permute every row."""
    rngs = _row_rngs(seed, panel.n_assets)
    out = np.empty_like(panel.returns)
    for i, rng in enumerate(rngs):
        out[i] = rng.permutation(panel.returns[i])
    return ReturnPanel(list(panel.tickers), out, panel.groups, panel.dates)


def simulate_gaussian(n: int, length: int, seed: int, tickers: list[str] | None = None) -> ReturnPanel:
    if n < 2 or length < 2:
        raise DataError("simulate_gaussian needs n >= 2 and length >= 2")
    rngs = _row_rngs(seed, n)
    out = np.vstack([rng.standard_normal(length) for rng in rngs])
    if tickers is None:
        tickers = [f"G{i:04d}" for i in range(n)]
    return ReturnPanel(list(tickers), out)


def simulate_factor_market(
    n: int = 50,
    length: int = 4000,
    block: int = 10,
    loading: float = 1.0,
    seed: int = 0,
    drift: float = 0.0,
) -> ReturnPanel:
    """Synthetic hub-factor market.

    The first ``block`` assets load on one common factor with ``loading``;
    every asset carries unit-variance idiosyncratic noise.  Block assets are
    labelled group 1, the rest group 2.
    """
    if block > n:
        raise DataError("block larger than market")
    rngs = _row_rngs(seed, n + 1)
    factor = rngs[0].standard_normal(length)
    rows = []
    for i in range(n):
        r = rngs[i + 1].standard_normal(length) + drift
        if i < block:
            r = r + loading * factor
        rows.append(r)
    tickers = [f"S{i:03d}" for i in range(n)]
    groups = {t: (1 if i < block else 2) for i, t in enumerate(tickers)}
    return ReturnPanel(tickers, np.vstack(rows) * 0.01, groups)


def write_panel(panel: ReturnPanel, path: str | Path) -> None:
    """Serialize a return panel as ``date,T1,...`` CSV (row index when undated)."""
    from .exports import atomic_writer, fmt

    labels = panel.dates if panel.dates is not None else [str(t + 1) for t in range(panel.length)]
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.tickers])
        for t, label in enumerate(labels):
            w.writerow([label, *(fmt(v) for v in panel.returns[:, t])])


def read_returns(path: str | Path, groups: dict[str, int] | None = None) -> ReturnPanel:
    """Inverse of :func:`write_panel`."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, [])
        if len(header) < 3 or header[0].strip().lower() != "date":
            raise DataError(f"{path}: malformed header")
        labels, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: ragged row")
            labels.append(row[0])
            try:
                rows.append([float(c) for c in row[1:]])
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparsable value") from None
    return ReturnPanel(header[1:], np.array(rows).T, groups, labels)
