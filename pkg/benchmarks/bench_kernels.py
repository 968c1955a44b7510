#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the same A* queries and polygon rasterizations through both backends,
verifies the outputs are identical, and reports wall-clock times. Example:

    python3 benchmarks/bench_kernels.py --grid 160 --paths 20
"""

import argparse
import time

import numpy as np

from proxibench import _pykernels

try:
    from proxibench import _ckernels
except ImportError:
    _ckernels = None


def make_grid(rng, n):
    labels = np.zeros((n, n), dtype=np.uint8)
    labels[rng.random((n, n)) < 0.25] = 1
    labels[0, 0] = labels[n - 1, n - 1] = 0
    return labels


def bench_astar(backend, grids, penalty):
    t0 = time.perf_counter()
    results = [
        backend.astar_search(g, 0, 0, g.shape[0] - 1, g.shape[1] - 1, penalty)
        for g in grids
    ]
    return time.perf_counter() - t0, results


def bench_mask(backend, xs, ys, hull, repeats):
    t0 = time.perf_counter()
    out = None
    for _ in range(repeats):
        out = backend.convex_polygon_mask(xs, ys, hull)
    return time.perf_counter() - t0, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", type=int, default=120, help="grid side length")
    parser.add_argument("--paths", type=int, default=10, help="number of A* queries")
    parser.add_argument("--penalty", type=float, default=0.1, help="turn penalty")
    parser.add_argument("--mask-repeats", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _ckernels is None:
        raise SystemExit("compiled backend not built; run pip install -e .")

    rng = np.random.default_rng(args.seed)
    grids = [make_grid(rng, args.grid) for _ in range(args.paths)]

    t_py, res_py = bench_astar(_pykernels, grids, args.penalty)
    t_c, res_c = bench_astar(_ckernels, grids, args.penalty)
    for a, b in zip(res_py, res_c):
        if (a is None) != (b is None):
            raise SystemExit("backend mismatch: reachability differs")
        if a is not None and (a[1:] != b[1:] or not np.array_equal(a[0], b[0])):
            raise SystemExit("backend mismatch: paths differ")

    xs = np.linspace(-10, 10, 600)
    ys = np.linspace(-10, 10, 600)
    hull = np.array([(-8.0, -6.0), (7.0, -7.5), (9.0, 5.0), (0.0, 8.5), (-7.0, 4.0)])
    tm_py, m_py = bench_mask(_pykernels, xs, ys, hull, args.mask_repeats)
    tm_c, m_c = bench_mask(_ckernels, xs, ys, hull, args.mask_repeats)
    if not np.array_equal(m_py, m_c):
        raise SystemExit("backend mismatch: masks differ")

    print(f"A* ({args.paths} x {args.grid}x{args.grid}, penalty {args.penalty}):")
    print(f"  python   {t_py:8.3f} s")
    print(f"  compiled {t_c:8.3f} s   ({t_py / t_c:5.1f}x)")
    print(f"polygon mask ({args.mask_repeats} x {xs.size}x{ys.size}):")
    print(f"  python   {tm_py:8.3f} s")
    print(f"  compiled {tm_c:8.3f} s   ({tm_py / tm_c:5.1f}x)")
    print("outputs identical across backends")


if __name__ == "__main__":
    main()
