"""Time the compiled and NumPy objective-table kernels against each other.

    python benchmarks/bench_kernels.py [--m 8 12 16] [--rows 8] [--repeat 3]
"""

import argparse
import time

import numpy as np

from regprop import kernels


def bench(backend, P, group, reg, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kernels.objective_table(P, group, 2, reg, 0.3, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--m", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--rows", type=int, default=8, help="populations per table")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--reg", nargs="+", default=["dp", "eeo", "bgl"])
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'reg':>4} {'m':>3} {'cells':>10} " + " ".join(f"{b + ' [s]':>12}" for b in backends) + "  speedup")
    rng = np.random.default_rng(0)
    for m in args.m:
        P = rng.random((args.rows, m))
        group = np.arange(m, dtype=np.int64) % 2
        for reg in args.reg:
            times, outs = [], []
            for b in backends:
                t, out = bench(b, P, group, reg, args.repeat)
                times.append(t)
                outs.append(out)
            err = max(float(np.max(np.abs(o - outs[0]))) for o in outs)
            speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else "       -"
            cells = args.rows * (1 << m)
            print(f"{reg:>4} {m:>3} {cells:>10} " + " ".join(f"{t:12.4f}" for t in times)
                  + f" {speed}  max|diff|={err:.1e}")


if __name__ == "__main__":
    main()
