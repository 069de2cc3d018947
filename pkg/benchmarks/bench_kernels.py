"""Wall-clock comparison of the numba and pure-numpy solver backends.

Usage: python3 benchmarks/bench_kernels.py [--steps 500 2000 8000] [--theta 0.85]
"""

import argparse
import time

import numpy as np

from abcpiq import _kernels
from abcpiq.model import TABLE2, TABLE2_INIT
from abcpiq.solver import Grid, solve_abc


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--theta", type=float, default=0.85)
    ap.add_argument("--t-end", type=float, default=100.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if "numba" in backends:
        t0 = time.perf_counter()
        solve_abc(TABLE2, TABLE2_INIT, args.theta, 1.0, Grid(1.0, 4), backend="numba")
        print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.3f} s")

    print(f"{'steps':>7} " + " ".join(f"{b:>10}" for b in backends) + "   speedup   max |diff|")
    for steps in args.steps:
        grid = Grid(args.t_end, steps)
        times, states = {}, {}
        for b in backends:
            times[b], traj = best_of(
                lambda b=b: solve_abc(TABLE2, TABLE2_INIT, args.theta, 1.0, grid, backend=b),
                args.repeat,
            )
            states[b] = traj.states
        row = f"{steps:>7} " + " ".join(f"{times[b]:>9.4f}s" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(states["numpy"] - states["numba"])))
            row += f"   {times['numpy'] / times['numba']:>6.1f}x   {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
