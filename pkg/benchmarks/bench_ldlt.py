"""Compare the compiled and pure-Python LDL^T kernels.

Times an inertia count and a block solve on R_theta box operators of
growing size; the speedup column compares inertia counts against the
python kernel.  Run with ``python3 benchmarks/bench_ldlt.py``.
"""
import argparse
import time

import numpy as np

from grainspec.eigensolve import AVAILABLE_BACKENDS, Factorization, count_below
from grainspec.experiments import rotation_box
from grainspec.potentials import PeriodicPotential


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="2,4,6,8", help="box half-widths n")
    parser.add_argument("--h", type=float, default=1 / 8)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    V = PeriodicPotential.cosine(30)
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(AVAILABLE_BACKENDS)}")
    print(f"{'n':>4} {'nodes':>7} {'band':>5} {'backend':>9} {'count s':>9} {'solve s':>9} "
          f"{'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        op = rotation_box(V, 0.15, n, args.h)
        rhs = rng.standard_normal((op.dimension, 4))
        base = None
        counts = set()
        for backend in sorted(AVAILABLE_BACKENDS, key=lambda b: b != "python"):
            t_count = best_of(lambda: counts.add(count_below(op, 57.0, backend).negatives),
                              args.repeat)
            fac = Factorization(op, 57.0, backend)
            t_solve = best_of(lambda: fac.solve(rhs), args.repeat)
            base = t_count if base is None else base
            print(f"{n:>4} {op.dimension:>7} {op.bandwidth:>5} {backend:>9} {t_count:>9.4f} "
                  f"{t_solve:>9.4f} {base / t_count:>7.1f}x")
        if len(counts) != 1:
            raise SystemExit(f"backends disagree on the inertia count at n={n}: {counts}")


if __name__ == "__main__":
    main()
