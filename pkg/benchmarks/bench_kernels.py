"""Compiled vs pure-Python kernel timings.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--repeat K]

Runs each hot kernel on a 2-D carpet sample and a 1-D Cantor sample with
both backends and prints the median wall time and the speed-up.
"""

import argparse
import statistics
import time

import numpy as np

from dimlab import kernels
from dimlab._kernels_py import EUCLIDEAN
from dimlab.generators import BMCarpetSpec, bedford_mcmullen_cloud, cantor_cloud


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return statistics.median(out)


def cases(points):
    depth = max(2, int(round(np.log(points) / np.log(3))))
    carpet = bedford_mcmullen_cloud(BMCarpetSpec(2, 3, ((0, 0), (1, 0), (1, 1))), depth).points
    line = cantor_cloud(max(2, int(round(np.log2(points))))).points
    n2, n1 = len(carpet), len(line)
    w2 = np.full(n2, 1.0 / n2)
    o2 = np.arange(n2, dtype=np.int64)
    sub = np.ascontiguousarray(carpet[:: max(1, n2 // 256)])
    return [
        (f"ball_weights 2-D n={n2}", lambda b: b.ball_weights(carpet, w2, carpet, 2.0**-5, EUCLIDEAN)),
        (f"greedy_pack 2-D n={n2}", lambda b: b.greedy_pack(carpet, o2, 2.0**-7, EUCLIDEAN)),
        (f"local_counts 2-D n={n2}", lambda b: b.local_counts(carpet, o2, sub, 2.0**-3, 2.0**-6, EUCLIDEAN)),
        (f"greedy_pack 1-D n={n1}", lambda b: b.greedy_pack(line, np.arange(n1, dtype=np.int64)[::-1].copy(), 2.0**-9, EUCLIDEAN)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=6561)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.compiled_available():
        print("compiled backend not built; only the fallback can be timed")
    from dimlab import _kernels_py

    backends = [("python", _kernels_py)]
    if kernels.compiled_available():
        from dimlab import _kernels

        backends.insert(0, ("compiled", _kernels))
    print(f"{'kernel':34s} " + " ".join(f"{n:>10s}" for n, _ in backends) + "   speed-up")
    for name, fn in cases(args.points):
        ts = [timed(lambda: fn(b), args.repeat) for _, b in backends]
        speed = f"{ts[-1] / ts[0]:8.1f}x" if len(ts) == 2 else ""
        print(f"{name:34s} " + " ".join(f"{t * 1e3:8.2f}ms" for t in ts) + f"   {speed}")


if __name__ == "__main__":
    main()
