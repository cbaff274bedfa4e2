from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorrnet.errors import DataError
from qcorrnet.seriesio import (
    PricePanel,
    ReturnPanel,
    load_groups,
    load_prices,
    log_returns,
    read_returns,
    shuffle_panel,
    simulate_factor_market,
    simulate_gaussian,
    write_panel,
)


def _csv(tmp_path, text, name="prices.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_small_panel(tmp_path):
    rows = "\n".join(f"2020-01-0{d},{10 + d},{20 + d},{30 + d}" for d in range(1, 6))
    panel = load_prices(_csv(tmp_path, "date,A,B,C\n" + rows + "\n"))
    assert panel.tickers == ["A", "B", "C"]
    assert panel.prices.shape == (3, 5)
    assert panel.prices[1, 0] == 21.0


def test_zero_price_rejected(tmp_path):
    with pytest.raises(DataError, match="non-positive price"):
        load_prices(_csv(tmp_path, "date,A,B\n2020-01-01,1,2\n2020-01-02,0.0,2\n"))


@pytest.mark.parametrize(
    "text",
    [
        "day,A,B\n2020-01-01,1,2\n2020-01-02,1,2\n",  # header
        "date,A,B\n2020-01-01,1,2\n2020-01-02,1\n",  # ragged
        "date,A\n2020-01-01,1\n2020-01-02,1\n",  # one asset
        "date,A,B\n2020-01-01,1,2\n",  # one date
        "date,A,B\n2020-01-02,1,2\n2020-01-01,1,2\n",  # order
        "date,A,B\n2020-01-01,1,x\n2020-01-02,1,2\n",  # number
        "date,A,A\n2020-01-01,1,2\n2020-01-02,1,2\n",  # duplicate ticker
    ],
)
def test_malformed_inputs(tmp_path, text):
    with pytest.raises(DataError):
        load_prices(_csv(tmp_path, text))


def test_missing_cells_drop_the_row(tmp_path, caplog):
    text = "date,A,B\n2020-01-01,1,2\n2020-01-02,,2\n2020-01-03,1.5,2.5\n"
    panel = load_prices(_csv(tmp_path, text))
    assert panel.dates == ["2020-01-01", "2020-01-03"]
    assert "dropped 1" in caplog.text


def test_paper_sized_panel(tmp_path):
    rng = np.random.default_rng(0)
    n, t = 401, 4025
    prices = np.exp(np.cumsum(0.01 * rng.standard_normal((t, n)), axis=0))
    import datetime as dt

    day0 = dt.date(2000, 1, 1)
    lines = ["date," + ",".join(f"T{i}" for i in range(n))]
    for k in range(t):
        lines.append((day0 + dt.timedelta(days=k)).isoformat() + "," + ",".join(repr(float(v)) for v in prices[k]))
    panel = load_prices(_csv(tmp_path, "\n".join(lines) + "\n"))
    assert panel.prices.shape == (401, 4025)
    assert log_returns(panel).length == 4024


def test_log_return_examples():
    def one(p):
        return log_returns(PricePanel(["A", "B"], ["d1", "d2", "d3"][: len(p)], np.vstack([p, p]))).returns[0]

    assert one([5.0, 5.0, 5.0]).tolist() == [0.0, 0.0]
    np.testing.assert_allclose(one([1.0, math.e, math.e**2]), [1.0, 1.0], rtol=1e-15)
    assert one([100.0, 110.0])[0] == pytest.approx(0.0953102, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60))
def test_returns_reconstruct_price_ratios(seed, t):
    rng = np.random.default_rng(seed)
    prices = np.exp(np.cumsum(rng.normal(0, 0.05, (3, t)), axis=1)) * rng.uniform(1, 500, (3, 1))
    panel = PricePanel(["A", "B", "C"], [str(k) for k in range(t)], prices)
    r = log_returns(panel).returns
    ratios = np.exp(np.concatenate([np.zeros((3, 1)), np.cumsum(r, axis=1)], axis=1))
    np.testing.assert_allclose(ratios, prices / prices[:, :1], rtol=1e-12)


def test_groups(tmp_path):
    g = load_groups(_csv(tmp_path, "ticker,group\nA,1\nB,2\n", "g.csv"))
    assert g == {"A": 1, "B": 2}
    with pytest.raises(DataError):
        load_groups(_csv(tmp_path, "ticker,group\nA,0\n", "bad.csv"))
    with pytest.raises(DataError):
        ReturnPanel(["A", "B"], np.zeros((2, 3)), {"A": 1})


# --------------------------------------------------------- reference models


def test_shuffle_examples():
    rng = np.random.default_rng(1)
    r = np.vstack([np.full(50, 0.25), rng.standard_normal(50)])
    panel = ReturnPanel(["A", "B"], r)
    out = shuffle_panel(panel, seed=7)
    assert np.array_equal(out.returns[0], r[0])
    assert np.array_equal(np.sort(out.returns[1]), np.sort(r[1]))
    assert not np.array_equal(out.returns[1], r[1])
    assert np.array_equal(shuffle_panel(panel, 7).returns, out.returns)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(2, 6), st.integers(2, 80))
def test_shuffle_preserves_sorted_rows(seed, n, t):
    r = np.random.default_rng(seed % 1000).standard_normal((n, t))
    out = shuffle_panel(ReturnPanel([str(i) for i in range(n)], r), seed)
    np.testing.assert_array_equal(np.sort(out.returns, axis=1), np.sort(r, axis=1))


def test_shuffle_rows_are_independent_substreams():
    # row i's permutation does not depend on how many rows come after it
    r = np.tile(np.arange(40.0), (5, 1))
    small = shuffle_panel(ReturnPanel(list("ABC"), r[:3]), 11).returns
    big = shuffle_panel(ReturnPanel(list("ABCDE"), r), 11).returns
    np.testing.assert_array_equal(small, big[:3])


def test_gaussian_examples():
    p = simulate_gaussian(401, 4024, seed=0)
    assert (p.n_assets, p.length) == (401, 4024)
    big = simulate_gaussian(2, 100_000, seed=5).returns
    assert np.all(np.abs(big.mean(axis=1)) < 0.02)
    assert np.all(np.abs(big.var(axis=1) - 1) < 0.02)
    np.testing.assert_array_equal(simulate_gaussian(3, 10, 9).returns, simulate_gaussian(3, 10, 9).returns)


def test_factor_market_structure():
    p = simulate_factor_market(n=20, length=3000, block=5, loading=1.0, seed=3)
    c = np.corrcoef(p.returns)
    inside = c[np.triu_indices(5, 1)]
    outside = c[5:, 5:][np.triu_indices(15, 1)]
    assert inside.min() > 0.35 and np.abs(outside).max() < 0.1
    assert p.groups["S000"] == 1 and p.groups["S019"] == 2


def test_panel_roundtrip(tmp_path):
    p = simulate_gaussian(3, 25, seed=2)
    write_panel(p, tmp_path / "r.csv")
    back = read_returns(tmp_path / "r.csv")
    assert back.tickers == p.tickers
    np.testing.assert_array_equal(back.returns, p.returns)
