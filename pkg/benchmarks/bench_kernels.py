"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--sizes 1000 100000] [--repeat 5] [--census]

Every kernel pair is first checked to give identical results on the
benchmark input.  ``--census`` also times the end-to-end census command with
and without COFINITE_DISABLE_NUMBA.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from cofinite import kernels
from cofinite._accel import HAVE_NUMBA


def inputs(name, n, rng):
    if name == "canonical":
        return (rng.integers(0, max(1, n // 4), n),)
    if name == "meet":
        a = kernels._canonical_np(rng.integers(0, max(1, n // 8), n))
        b = kernels._canonical_np(rng.integers(0, max(1, n // 8), n))
        return a, b
    if name == "refines":
        b = kernels._canonical_np(rng.integers(0, max(1, n // 8), n))
        a = kernels._meet_np(b, kernels._canonical_np(rng.integers(0, max(1, n // 2), n)))
        return a, b  # a refines b: both kernels scan everything
    if name == "closure":
        u = rng.integers(0, n, n // 2)
        v = rng.integers(0, n, n // 2)
        return n, u, v
    # boolean matrices of side ~ sqrt(n) * 4, capped
    m = min(600, max(8, int(np.sqrt(n)) * 4))
    return rng.random((m, m)) < 0.05, rng.random((m, m)) < 0.05


def best_time(fn, args, repeat):
    fn(*args)  # warm up (and compile)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def same(a, b):
    if isinstance(a, tuple):
        return all(int(x) == int(y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def bench_kernels(sizes, repeat, seed=0):
    rows = []
    for n in sizes:
        rng = np.random.default_rng(seed)
        for name, np_fn in kernels.NUMPY_KERNELS.items():
            args = inputs(name, n, rng)
            row = {"kernel": name, "n": n, "numpy_s": best_time(np_fn, args, repeat)}
            if HAVE_NUMBA:
                nb_fn = kernels.NUMBA_KERNELS[name]
                if not same(nb_fn(*args), np_fn(*args)):
                    raise SystemExit(f"{name}: backends disagree at n={n}")
                row["numba_s"] = best_time(nb_fn, args, repeat)
                row["speedup"] = row["numpy_s"] / row["numba_s"]
            rows.append(row)
    return rows


def bench_census(horizon=30):
    out = {}
    for label, extra in (("numba", {}), ("numpy", {"COFINITE_DISABLE_NUMBA": "1"})):
        env = {**os.environ, **extra}
        t = time.perf_counter()
        subprocess.run([sys.executable, "-m", "cofinite", "census", "builtin:phi1", "--horizon", str(horizon)],
                       env=env, check=True, capture_output=True)
        out[label] = time.perf_counter() - t
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--census", action="store_true")
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()

    rows = bench_kernels(a.sizes, a.repeat)
    census = bench_census() if a.census else None
    if a.json:
        print(json.dumps({"kernels": rows, "census": census}, indent=2))
        return
    if not HAVE_NUMBA:
        print("numba unavailable: numpy timings only")
    print(f"{'kernel':<10} {'n':>9} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for r in rows:
        nb = f"{r['numba_s'] * 1e3:10.3f}" if "numba_s" in r else f"{'-':>10}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8}"
        print(f"{r['kernel']:<10} {r['n']:>9} {r['numpy_s'] * 1e3:10.3f} {nb} {sp}")
    if census:
        print(f"census builtin:phi1 --horizon 30, whole process: "
              f"numba {census['numba']:.2f} s, numpy {census['numpy']:.2f} s")


if __name__ == "__main__":
    main()
