"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 7]

Times the hot paths on representative desk-scale inputs: normal-equation
assembly and residual evaluation for the solver (N=500, 30% of pairs), and
the 256x256 raster kernels (IoU counts, pixel diff, one-vs-many IoU batch).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from planspace import _pykernels

try:
    from planspace import _ckernels
except ImportError:
    _ckernels = None


def timed(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def solver_inputs(n=500, d=3, density=0.30, seed=0):
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 1.0, (n, d))
    pairs = [
        (a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < density
    ]
    ii = np.array([a for a, _ in pairs], dtype=np.int32)
    jj = np.array([b for _, b in pairs], dtype=np.int32)
    targets = rng.uniform(0.05, 1.5, len(pairs))
    return coords, ii, jj, targets


def raster_inputs(seed=1):
    rng = np.random.default_rng(seed)
    a = np.ascontiguousarray(rng.integers(0, 9, (256, 256)).astype(np.uint8))
    b = np.ascontiguousarray(rng.integers(0, 9, (256, 256)).astype(np.uint8))
    stack = np.ascontiguousarray(rng.integers(0, 9, (200, 256, 256)).astype(np.uint8))
    return a, b, stack


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    coords, ii, jj, targets = solver_inputs()
    a, b, stack = raster_inputs()
    eps = 1e-12

    cases = [
        (f"pair_residuals (m={len(ii)})",
         lambda impl: impl.pair_residuals(coords, ii, jj, targets, eps)),
        (f"normal_equations (n=500, m={len(ii)})",
         lambda impl: impl.normal_equations(coords, ii, jj, targets, eps)),
        ("iou_counts (256x256)",
         lambda impl: impl.iou_counts(a, b, False)),
        ("pixel_diff (256x256)",
         lambda impl: impl.pixel_diff(a, b)),
        ("iou_distance_stack (200 x 256x256)",
         lambda impl: impl.iou_distance_stack(a, stack, False)),
    ]

    print(f"{'kernel':<38} {'python':>12} {'compiled':>12} {'speedup':>9}")
    print("-" * 74)
    for name, call in cases:
        py = timed(lambda: call(_pykernels), args.repeats)
        if _ckernels is None:
            print(f"{name:<38} {py * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        cc = timed(lambda: call(_ckernels), args.repeats)
        print(f"{name:<38} {py * 1e3:>10.2f}ms {cc * 1e3:>10.2f}ms {py / cc:>8.1f}x")
    if _ckernels is None:
        print("\ncompiled extension not built; run 'pip install -e .' first")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
