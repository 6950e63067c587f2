"""Time the compiled kernel core against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from toabox import _backend


def cases(points: int):
    rng = np.random.default_rng(0)
    q, qp = rng.uniform(-1, 1, (2, points))
    args = (0.5, 1.0, 1.0, 1.0)
    checkpoints = np.array([1000], dtype=np.int64)
    small = slice(0, max(1, points // 100))
    return {
        "closed": lambda be: be.closed(q, qp, *args),
        "periodic": lambda be: be.periodic(q, qp, 1.0, 1.0, 1.0),
        "zero_mode": lambda be: be.zero_mode(q, qp, *args),
        f"series_1000x{points // 100}": lambda be: be.series_sums(q[small], qp[small], *args, checkpoints),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _backend.compiled is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}")
    for name, fn in cases(args.points).items():
        t_py = min(timeit.repeat(lambda: fn(_backend.python), number=1, repeat=args.repeat)) * 1e3
        if _backend.compiled is None:
            print(f"{name:<22}{t_py:>12.2f}{'-':>13}{'-':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(_backend.compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_py:>12.2f}{t_cy:>13.2f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
