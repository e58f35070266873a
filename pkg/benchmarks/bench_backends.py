"""Timing comparison of the compiled and pure-Python numeric cores.

Run directly:

    python3 benchmarks/bench_backends.py [--repeat 5]

Times the three hot paths (closed-form kernel values, the Gauss
hypergeometric family, and whole node-grid kernel matrices) on both
cores and prints one table.  Needs no pytest and writes nothing.
"""
import argparse
import time

import numpy as np

from fracfield import _purekern

try:
    from fracfield import _fastkern
except ImportError:
    _fastkern = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(impl, repeat):
    rr = np.linspace(0.02, 1.0, 40)
    nodes = np.linspace(1.0 / 96, 1.0, 96)
    w = np.linspace(0.0, 0.99, 200)

    def bm_closed():
        for r in rr:
            for s in rr:
                impl.bm_closed(2, 0.3, 1, float(r), float(s))

    def f21():
        for m in (0, 1, 4):
            for v in w:
                impl.f21_family(3, 0.75, m, float(v))

    def matrix():
        for m in (0, 1, 4):
            impl.kernel_matrix(2, 0.5, m, nodes)

    return {
        "bm_closed (1600 pts)": _time(bm_closed, repeat),
        "f21_family (600 pts)": _time(f21, repeat),
        "kernel_matrix (3 x 96^2)": _time(matrix, repeat),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best-of (default 5)")
    args = parser.parse_args()

    pure = bench(_purekern, args.repeat)
    fast = bench(_fastkern, args.repeat) if _fastkern is not None else None

    width = max(len(k) for k in pure)
    header = f"{'benchmark':<{width}}  {'pure':>10}"
    if fast is not None:
        header += f"  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for key, tp in pure.items():
        line = f"{key:<{width}}  {tp * 1e3:>8.2f}ms"
        if fast is not None:
            tf = fast[key]
            line += f"  {tf * 1e3:>8.2f}ms  {tp / tf:>7.1f}x"
        print(line)
    if fast is None:
        print("\ncompiled core not built; showing the pure core only")


if __name__ == "__main__":
    main()
