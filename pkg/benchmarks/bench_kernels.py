"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--cftp-samples N]
"""

import argparse
import time

import numpy as np

from rdsmc import _pykernels, rng
from rdsmc.core import StochasticMatrix

try:
    from rdsmc import _ckernels
except ImportError:
    _ckernels = None


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=1_000_000)
    parser.add_argument("--cftp-samples", type=int, default=20_000)
    args = parser.parse_args()

    m = StochasticMatrix(
        [[0.0, 2 / 3, 1 / 3], [1 / 3, 0.0, 2 / 3], [2 / 3, 1 / 3, 0.0]]
    )
    cum = m.cumulative_rows()
    us = rng.uniforms(rng.substream(1, 1), args.steps)

    images = np.array([[0, 1], [1, 0], [0, 0], [1, 1]], dtype=np.int64)
    cum_q = np.cumsum([0.2, 0.2, 0.3, 0.3])
    cum_q[-1] = 1.0
    keys = np.array(
        [rng.substream(2, s) for s in range(args.cftp_samples)], dtype=np.uint64
    )

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("compiled extension not built; benchmarking fallback only")

    results = {}
    for name, mod in backends:
        t_path, traj = timed(mod.mc_path, cum, 0, us)
        t_cyc, counts = timed(mod.count_cycles, traj)
        t_cftp, (states, _) = timed(mod.cftp_many, images, cum_q, keys, 20)
        results[name] = (t_path, t_cyc, t_cftp)
        print(
            f"{name:>7}: mc_path({args.steps} steps) {t_path * 1e3:8.1f} ms   "
            f"count_cycles {t_cyc * 1e3:8.1f} ms   "
            f"cftp_many({args.cftp_samples}) {t_cftp * 1e3:8.1f} ms"
        )

    if len(results) == 2:
        c, p = results["cython"], results["python"]
        print(
            "speedup: "
            f"mc_path x{p[0] / c[0]:.0f}   "
            f"count_cycles x{p[1] / c[1]:.0f}   "
            f"cftp_many x{p[2] / c[2]:.0f}"
        )


if __name__ == "__main__":
    main()
