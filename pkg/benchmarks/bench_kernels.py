"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 1000,4000,9592] [--repeat 3]

Prints one row per (kernel, size) with both timings, the speedup and the
relative difference of the results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from heckepair import _pykernels

try:
    from heckepair import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def cases(n: int, rng: np.random.Generator):
    theta = rng.random(n)
    w = rng.random(n)
    t1 = rng.standard_normal(n)
    yield "smooth_pair_sum/fejer", lambda m: m.smooth_pair_sum(w, theta, n, _pykernels.FEJER)
    yield "smooth_pair_sum/raised", lambda m: m.smooth_pair_sum(w, theta, n, _pykernels.RAISED_COSINE)
    yield "series_sums", lambda m: m.series_sums(t1, theta, min(n, 2000))
    yield "hurwitz12_table", lambda m: m.hurwitz12_table(200 * n)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sizes", default="1000,4000,9592")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'n':>7}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>9}{'rel diff':>11}")
    for n in (int(v) for v in args.sizes.split(",")):
        for name, call in cases(n, rng):
            tp, rp = _best(lambda: call(_pykernels), args.repeat)
            tc, rc = _best(lambda: call(_ckernels), args.repeat)
            print(f"{name:<24}{n:>7}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}{_rel(rc, rp):>11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
