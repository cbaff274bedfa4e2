"""Compare the compiled and pure-Python planarity kernels.

Times greedy PMFG edge selection (the hot loop) on random correlation
matrices and checks that both backends pick the same edges.

    python benchmarks/bench_planarity.py --sizes 20,50,100 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qcorrnet import _lr_py
from qcorrnet.pmfg import ranked_candidates

try:
    from qcorrnet import _lr_core
except ImportError:
    _lr_core = None


def random_corr(n: int, seed: int) -> np.ndarray:
    a = np.random.default_rng(seed).uniform(-1, 1, (n, n))
    m = (a + a.T) / 2
    np.fill_diagonal(m, 1.0)
    return m


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="20,50,100", help="comma-separated matrix sizes")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = [("python", _lr_py)]
    if _lr_core is None:
        print("compiled kernel not built; timing the Python backend only")
    else:
        backends.append(("cython", _lr_core))

    print(f"{'N':>5} " + " ".join(f"{name:>10}" for name, _ in backends) + ("    speedup" if len(backends) == 2 else ""))
    for n in (int(v) for v in args.sizes.split(",")):
        cu, cv = ranked_candidates(random_corr(n, args.seed))
        target = 3 * (n - 2)
        picks, times = [], []
        for _, mod in backends:
            picks.append(list(mod.pmfg_select(n, cu, cv, target)))
            times.append(best_time(lambda mod=mod: mod.pmfg_select(n, cu, cv, target), args.repeat))
        if len(picks) == 2 and picks[0] != picks[1]:
            raise SystemExit(f"backends disagree at N={n}")
        line = f"{n:>5} " + " ".join(f"{t:>9.3f}s" for t in times)
        if len(times) == 2:
            line += f" {times[0] / times[1]:>9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
