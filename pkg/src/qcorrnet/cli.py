"""Command-line pipeline: grid -> rmt / pmfg / portfolio, plus reference panels.

Every stage writes into a subdirectory of ``--out`` and records a
``manifest.json`` holding the content hash of its input and of every file it
wrote.  Outputs contain no timestamps, so identical inputs and seeds give
byte-identical trees.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
degeneracy.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import pmfg as pmfg_mod
from . import portfolio as pf
from . import rmt
from .errors import ConfigError, DataError, QCorrError
from .exports import array_hash, atomic_writer, file_hash, fmt, write_json, write_rows
from .qdcca import DetrendConfig, QCorrMatrix, corr_grid, matrix_moments
from .seriesio import (
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

log = logging.getLogger("qcorrnet")

DEFAULT_SIZES = (10, 20, 30, 40, 50, 60)
DEFAULT_TAUS = tuple(round(0.05 * k, 10) for k in range(21))


def _key(q: float, s: int) -> str:
    return f"q{q:g}_s{s}"


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- panel input


def _load_panel(args) -> ReturnPanel:
    groups = load_groups(_existing(args.groups)) if getattr(args, "groups", None) else None
    if getattr(args, "returns", None):
        return read_returns(_existing(args.returns), groups)
    if not getattr(args, "prices", None):
        raise ConfigError("one of --prices or --returns is required")
    return log_returns(load_prices(_existing(args.prices)), groups)


def _existing(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such file: {p}")
    return p


def _config(args) -> DetrendConfig:
    return DetrendConfig(
        poly_order=args.poly_order,
        min_scale=args.s_min,
        max_scale=args.s_max,
        scale_step=args.s_step,
        q_min=args.q_min,
        q_max=args.q_max,
        q_step=args.q_step,
    )


def _config_dict(cfg: DetrendConfig) -> dict:
    return {
        "poly_order": cfg.poly_order,
        "min_scale": cfg.min_scale,
        "max_scale": cfg.max_scale,
        "scale_step": cfg.scale_step,
        "q_min": cfg.q_min,
        "q_max": cfg.q_max,
        "q_step": cfg.q_step,
    }


# ----------------------------------------------------------------------- grid


def _write_matrix(path: Path, m: QCorrMatrix) -> None:
    with atomic_writer(path) as fh:
        fh.write(",".join(["ticker", *m.tickers]) + "\n")
        for t, row in zip(m.tickers, m.rho):
            fh.write(",".join([t, *(fmt(v) for v in row)]) + "\n")


def read_matrix(path: str | Path, q: float, s: int, poly_order: int = 2) -> QCorrMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")[1:]
        rows = [line.rstrip("\n").split(",")[1:] for line in fh if line.strip()]
    rho = np.array(rows, dtype=float)
    if rho.shape != (len(header), len(header)):
        raise DataError(f"{path}: malformed matrix file")
    return QCorrMatrix(q, s, rho, header, poly_order)


def _grid_scale(job):
    panel, cfg, s = job
    return s, corr_grid(panel, cfg, scales=[s])


def cmd_grid(args) -> dict:
    panel = _load_panel(args)
    cfg = _config(args)
    cfg.check_length(panel.length)
    out = Path(args.out) / "grid"
    out.mkdir(parents=True, exist_ok=True)
    write_panel(panel, out / "returns.csv")
    if panel.groups:
        write_rows(out / "groups.csv", ["ticker", "group"], ((t, panel.groups[t]) for t in panel.tickers))
    source = array_hash(panel.returns, panel.tickers)

    manifest_path = out / "manifest.json"
    old = {}
    if manifest_path.exists():
        prev = json.loads(manifest_path.read_text())
        if prev.get("source_hash") == source and prev.get("config") == _config_dict(cfg):
            old = {(e["q"], e["s"]): e for e in prev.get("entries", [])}

    def fresh(q, s):
        e = old.get((q, s))
        if not e:
            return False
        mpath, spath = out / e["matrix"], out / e["sidecar"]
        return mpath.exists() and spath.exists() and file_hash(mpath) == e["sha256"]

    todo = [s for s in cfg.scales if not all(fresh(q, s) for q in cfg.qs)]
    computed = 0
    for s, mats in _map(_grid_scale, [(panel, cfg, s) for s in todo], args.jobs):
        for (q, _), m in mats.items():
            _write_matrix(out / f"{_key(q, s)}.csv", m)
            sidecar = {"q": q, "s": s, "m": cfg.poly_order, "N": panel.n_assets, "L": panel.length, "source_hash": source}
            write_json(out / f"{_key(q, s)}.json", sidecar)
            computed += 1

    entries = []
    for q in cfg.qs:
        for s in cfg.scales:
            name = _key(q, s)
            entries.append(
                {"q": q, "s": s, "matrix": f"{name}.csv", "sidecar": f"{name}.json", "sha256": file_hash(out / f"{name}.csv")}
            )
    manifest = {
        "source_hash": source,
        "config": _config_dict(cfg),
        "N": panel.n_assets,
        "L": panel.length,
        "returns": "returns.csv",
        "groups": "groups.csv" if panel.groups else None,
        "entries": entries,
    }
    write_json(manifest_path, manifest)
    log.info("grid: %d points, %d recomputed", len(entries), computed)
    return {"manifest": manifest, "computed": computed}


def _open_grid(out: Path) -> tuple[dict, ReturnPanel, DetrendConfig]:
    gdir = out / "grid"
    mpath = gdir / "manifest.json"
    if not mpath.exists():
        raise ConfigError(f"missing grid manifest {mpath}; run 'grid' first")
    manifest = json.loads(mpath.read_text())
    groups = load_groups(gdir / manifest["groups"]) if manifest.get("groups") else None
    panel = read_returns(gdir / manifest["returns"], groups)
    return manifest, panel, DetrendConfig(**manifest["config"])


def _iter_matrices(out: Path, manifest: dict):
    gdir = out / "grid"
    order = manifest["config"]["poly_order"]
    for e in manifest["entries"]:
        path = gdir / e["matrix"]
        if not path.exists():
            raise DataError(f"missing matrix file {path}")
        yield e, read_matrix(path, e["q"], e["s"], order)


class _Stage:
    """Output directory of one pipeline stage; remembers which files this run wrote."""

    def __init__(self, root: Path, name: str):
        self.dir = root / name
        self.dir.mkdir(parents=True, exist_ok=True)
        self.names: list[str] = []

    def path(self, name: str) -> Path:
        self.names.append(name)
        return self.dir / name

    def finish(self, upstream: dict, extra: dict | None = None) -> None:
        body = {
            "input_hash": array_hash(upstream.get("source_hash"), [e["sha256"] for e in upstream["entries"]]),
            "files": [{"file": n, "sha256": file_hash(self.dir / n)} for n in sorted(set(self.names))],
        }
        if extra:
            body.update(extra)
        write_json(self.dir / "manifest.json", body)


# ------------------------------------------------------------------------ rmt


def _eigen_report(rho: np.ndarray, bounds: rmt.MpBounds) -> tuple[dict, rmt.EigenSystem]:
    es = rmt.eig_sym(rho)
    bulk, dev = rmt.classify_eigenvalues(es, bounds)
    inv = rmt.ipr(es)
    report = {
        "bounds": {"Q": bounds.q_ratio, "lambda_minus": bounds.lambda_minus, "lambda_plus": bounds.lambda_plus},
        "eigenvalues": es.eigenvalues,
        "ipr": inv,
        "pr": 1.0 / inv,
        "deviating": (dev + 1).tolist(),
        "all_bulk": bool(dev.size == 0),
    }
    return report, es


def _eigen_indices(spec: str | None, n: int) -> list[int]:
    if not spec:
        return sorted({1, 2, max(1, n - 1), n})
    ks = [int(x) for x in spec.split(",") if x.strip()]
    if any(k < 1 or k > n for k in ks):
        raise ConfigError(f"eigen indices must lie in 1..{n}")
    return ks


def _sector_vectors(rho: np.ndarray, es: rmt.EigenSystem, proj, ks: list[int], deflate: bool) -> dict[int, np.ndarray]:
    system = rmt.deflated_system(rho, es) if deflate else es
    return {k: rmt.sector_contributions(system, proj, k - 1) for k in ks}


def cmd_rmt(args) -> None:
    out = Path(args.out)
    manifest, panel, cfg = _open_grid(out)
    stage = _Stage(out, "rmt")
    n, length = manifest["N"], manifest["L"]
    bounds = rmt.mp_bounds(n, length)
    groups = load_groups(_existing(args.groups)) if args.groups else panel.groups
    proj = rmt.sector_projection(panel.tickers, groups) if groups else None
    ks = _eigen_indices(args.eigen_indices, n)

    baselines = {}
    if args.baselines:
        shuffled = shuffle_panel(panel, args.seed)
        simulated = simulate_gaussian(n, length, args.seed + 1, panel.tickers)
        baselines = {"shuffled": corr_grid(shuffled, cfg), "simulated": corr_grid(simulated, cfg)}
        extra_shuffles = [corr_grid(shuffle_panel(panel, args.seed + 100 + r), cfg) for r in range(args.shuffles)] if proj else []

    moments = []
    for e, m in _iter_matrices(out, manifest):
        q, s = e["q"], e["s"]
        name = _key(q, s)
        report, es = _eigen_report(m.rho, bounds)
        mo = matrix_moments(m)
        moments.append((q, s, mo.mean, mo.variance, mo.skewness, mo.kurtosis))
        if baselines:
            report["baselines"] = {}
            hist_cols = {}
            for label in ("original", "shuffled", "simulated"):
                rho = m.rho if label == "original" else baselines[label][(q, s)].rho
                if label == "original":
                    vals = es.eigenvalues
                else:
                    sub, _ = _eigen_report(rho, bounds)
                    vals = np.asarray(sub["eigenvalues"])
                    report["baselines"][label] = {"eigenvalues": vals, "deviating": sub["deviating"]}
                edges, dens = rmt.spectrum_histogram(vals[vals < 2.0], args.bin_width)
                hist_cols[label] = dens
            write_rows(
                stage.path(f"hist_{name}.csv"),
                ["bin_lo", "bin_hi", "original", "shuffled", "simulated"],
                zip(edges[:-1], edges[1:], hist_cols["original"], hist_cols["shuffled"], hist_cols["simulated"]),
            )
        write_json(stage.path(f"eigen_{name}.json"), report)

        if proj is not None:
            cols = _sector_vectors(m.rho, es, proj, ks, args.deflate)
            header = ["group", *(str(k) for k in ks)]
            table = [cols[k] for k in ks]
            if baselines and extra_shuffles:
                samples = {k: [] for k in ks}
                for grid in extra_shuffles:
                    rho = grid[(q, s)].rho
                    sv = _sector_vectors(rho, rmt.eig_sym(rho), proj, ks, args.deflate)
                    for k in ks:
                        samples[k].append(sv[k])
                for k in ks:
                    header += [f"shuffled_mean_{k}", f"shuffled_sd_{k}"]
                    arr = np.array(samples[k])
                    table += [arr.mean(axis=0), arr.std(axis=0)]
            rows = [[g, *(col[i] for col in table)] for i, g in enumerate(proj.groups)]
            write_rows(stage.path(f"sectors_{name}.csv"), header, rows)

    write_rows(stage.path("moments.csv"), ["q", "s", "mean", "variance", "skewness", "kurtosis"], moments)
    stage.finish(manifest, {"seed": args.seed, "baselines": bool(args.baselines), "deflate": bool(args.deflate)})


# ----------------------------------------------------------------------- pmfg


def _pmfg_job(m: QCorrMatrix):
    g = pmfg_mod.build_pmfg(m)
    return g, pmfg_mod.topology(g)


def cmd_pmfg(args) -> None:
    out = Path(args.out)
    manifest, _, _ = _open_grid(out)
    stage = _Stage(out, "pmfg")
    mats = list(_iter_matrices(out, manifest))
    results = _map(_pmfg_job, [m for _, m in mats], args.jobs)
    rows = []
    for (e, _), (g, topo) in zip(mats, results):
        pmfg_mod.write_edges(g, stage.path(f"edges_{_key(e['q'], e['s'])}.csv"))
        rows.append((e["q"], e["s"], topo.clustering, topo.path_length, topo.heterogeneity, topo.assortativity))
    write_rows(stage.path("topology.csv"), ["q", "s", "C", "L", "gamma", "A"], rows)
    stage.finish(manifest)


# ------------------------------------------------------------------ portfolio


def _eta_job(m: QCorrMatrix):
    return pf.centrality_eta(pmfg_mod.build_pmfg(m)).eta


def _sizes(spec: str | None, n: int) -> list[int]:
    sizes = list(DEFAULT_SIZES) if not spec else [int(x) for x in spec.split(",") if x.strip()]
    if any(m < 2 for m in sizes):
        raise ConfigError("portfolio sizes must be >= 2")
    too_big = [m for m in sizes if m > n]
    if too_big:
        log.warning("skipping portfolio sizes larger than N=%d: %s", n, too_big)
    return [m for m in sizes if m <= n]


def cmd_portfolio(args) -> None:
    out = Path(args.out)
    manifest, panel, cfg = _open_grid(out)
    stage = _Stage(out, "portfolio")
    sizes = _sizes(args.sizes, panel.n_assets)
    modes = [m.strip() for m in args.modes.split(",")] if args.modes else list(pf.MODES)
    bad = [m for m in modes if m not in pf.MODES]
    if bad:
        raise ConfigError(f"unknown modes {bad}")
    taus = [float(t) for t in args.taus.split(",")] if args.taus else list(DEFAULT_TAUS)

    mats = dict(((e["q"], e["s"]), m) for e, m in _iter_matrices(out, manifest))
    delta_qs = DetrendConfig(cfg.poly_order, cfg.min_scale, cfg.max_scale, cfg.scale_step, cfg.q_min, args.delta_q_max, cfg.q_step).qs
    extra_qs = [q for q in delta_qs if (q, cfg.scales[0]) not in mats]
    if extra_qs:
        mats.update(corr_grid(panel, cfg, qs=extra_qs))
    keys = sorted(mats)
    etas = dict(zip(keys, _map(_eta_job, [mats[k] for k in keys], args.jobs)))
    grid_keys = [(e["q"], e["s"]) for e in manifest["entries"]]

    def scores(key):
        return pf.CentralityScores({}, etas[key])

    risk_levels = {}
    for m in sizes:
        rows = []
        for key in grid_keys:
            for mode in modes:
                if mode == "random":
                    continue
                members = pf.select_portfolio(scores(key), m, mode)
                for p in pf.frontier(panel, members, taus, args.train_fraction):
                    rows.append((key[0], key[1], mode, p.tau, p.risk, p.ret))
        if "random" in modes:
            for p in pf.random_frontier(panel, m, taus, seed=args.seed, draws=args.random_draws, train_fraction=args.train_fraction):
                rows.append(("", "", "random", p.tau, p.risk, p.ret))
        write_rows(stage.path(f"frontier_m{m}.csv"), ["q", "s", "mode", "tau", "risk", "return"], rows)

        selections = {
            key: {mode: pf.select_portfolio(scores(key), m, mode) for mode in ("peripheral", "central")} for key in keys
        }
        curve = pf.delta_curve(
            panel, mats, m, risk_level=args.risk_level, q_list=delta_qs, selections=selections, train_fraction=args.train_fraction
        )
        risk_levels[str(m)] = curve.risk_level
        write_rows(stage.path(f"delta_m{m}.csv"), ["q", "delta"], zip(curve.qs, curve.delta))
    stage.finish(manifest, {"risk_levels": risk_levels, "seed": args.seed, "taus": taus, "train_fraction": args.train_fraction})


# ------------------------------------------------------------ reference panels


def _synthetic_prices(panel: ReturnPanel, start: str = "2000-01-03") -> PricePanel:
    day = _dt.date.fromisoformat(start)
    dates = []
    while len(dates) < panel.length + 1:
        if day.weekday() < 5:
            dates.append(day.isoformat())
        day += _dt.timedelta(days=1)
    logp = np.concatenate([np.zeros((panel.n_assets, 1)), np.cumsum(panel.returns, axis=1)], axis=1)
    return PricePanel(panel.tickers, dates, 100.0 * np.exp(logp))


def _write_prices(prices: PricePanel, path: Path) -> None:
    with atomic_writer(path) as fh:
        fh.write(",".join(["date", *prices.tickers]) + "\n")
        for t, d in enumerate(prices.dates):
            fh.write(",".join([d, *(fmt(v) for v in prices.prices[:, t])]) + "\n")


def cmd_simulate(args) -> None:
    out = Path(args.out)
    if args.market == "factor":
        panel = simulate_factor_market(args.n, args.length, args.block, args.loading, args.seed)
    else:
        panel = simulate_gaussian(args.n, args.length, args.seed)
    write_panel(panel, out / "returns.csv")
    _write_prices(_synthetic_prices(panel), out / "prices.csv")
    if panel.groups:
        write_rows(out / "groups.csv", ["ticker", "group"], ((t, panel.groups[t]) for t in panel.tickers))


def cmd_shuffle(args) -> None:
    panel = _load_panel(args)
    write_panel(shuffle_panel(panel, args.seed), Path(args.out) / "shuffled_returns.csv")


def cmd_run(args) -> None:
    cmd_grid(args)
    cmd_rmt(args)
    cmd_pmfg(args)
    cmd_portfolio(args)


# ------------------------------------------------------------------- argparse


def _add_input(p):
    p.add_argument("--prices", help="wide price CSV: date,T1,T2,...")
    p.add_argument("--returns", help="wide return CSV (alternative to --prices)")
    p.add_argument("--groups", help="ticker,group CSV")


def _add_grid(p):
    d = DetrendConfig()
    p.add_argument("--q-min", type=float, default=d.q_min)
    p.add_argument("--q-max", type=float, default=d.q_max)
    p.add_argument("--q-step", type=float, default=d.q_step)
    p.add_argument("--s-min", type=int, default=d.min_scale)
    p.add_argument("--s-max", type=int, default=d.max_scale)
    p.add_argument("--s-step", type=int, default=d.scale_step)
    p.add_argument("--poly-order", type=int, default=d.poly_order)


def _add_rmt(p):
    p.add_argument("--baselines", action="store_true", help="add shuffled and Gaussian reference spectra")
    p.add_argument("--shuffles", type=int, default=5, help="shuffle realisations for sector bands")
    p.add_argument("--eigen-indices", help="1-based eigen indices for sector CSVs (default 1,2,N-1,N)")
    p.add_argument("--deflate", action="store_true", help="remove the market mode before sector contributions")
    p.add_argument("--bin-width", type=float, default=0.05)


def _add_portfolio(p):
    p.add_argument("--sizes", help="comma-separated portfolio sizes (default 10,...,60)")
    p.add_argument("--modes", help="comma-separated subset of peripheral,central,random")
    p.add_argument("--risk-level", type=float, help="fixed variance level for the delta curve")
    p.add_argument("--taus", help="comma-separated risk tolerances")
    p.add_argument("--delta-q-max", type=float, default=10.0)
    p.add_argument("--random-draws", type=int, default=100)
    p.add_argument("--train-fraction", type=float, help="estimate on this leading share, evaluate on the rest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorrnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("grid", parents=[common], help="q-dependent correlation matrices over the (q,s) grid")
    _add_input(p)
    _add_grid(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("rmt", parents=[common], help="eigen, moment, sector and histogram reports")
    p.add_argument("--groups")
    _add_rmt(p)
    p.set_defaults(func=cmd_rmt)

    p = sub.add_parser("pmfg", parents=[common], help="PMFG edge lists and topology table")
    p.set_defaults(func=cmd_pmfg)

    p = sub.add_parser("portfolio", parents=[common], help="efficient frontiers and delta(q) curves")
    _add_portfolio(p)
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic panel")
    p.add_argument("--market", choices=["gaussian", "factor"], default="gaussian")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--length", type=int, default=4000)
    p.add_argument("--block", type=int, default=10)
    p.add_argument("--loading", type=float, default=1.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("shuffle", parents=[common], help="write a row-shuffled return panel")
    _add_input(p)
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("run", parents=[common], help="grid, rmt, pmfg and portfolio in sequence")
    _add_input(p)
    _add_grid(p)
    _add_rmt(p)
    _add_portfolio(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except QCorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
