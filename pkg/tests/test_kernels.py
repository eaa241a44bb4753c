import os
import subprocess
import sys

import numpy as np
import pytest

from cofinite import kernels
from cofinite._accel import HAVE_NUMBA, backend

NAMES = ("canonical", "meet", "refines", "closure", "compose")


def cases(seed=0, count=200):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(0, 40))
        a = rng.integers(0, max(1, n // 3 + 1), n).astype(np.int64)
        b = rng.integers(0, 4, n).astype(np.int64)
        yield n, a, b, rng


def test_backends_agree():
    nb, npk = kernels.NUMBA_KERNELS, kernels.NUMPY_KERNELS
    for n, a, b, rng in cases():
        ca = npk["canonical"](a)
        assert np.array_equal(nb["canonical"](a), ca)
        assert np.array_equal(nb["meet"](a, b), npk["meet"](a, b))
        assert tuple(map(int, nb["refines"](ca, b))) == tuple(map(int, npk["refines"](ca, b)))
        m = int(rng.integers(0, 2 * n + 1))
        u = rng.integers(0, max(n, 1), m).astype(np.int64) if n else np.empty(0, np.int64)
        v = rng.integers(0, max(n, 1), m).astype(np.int64) if n else np.empty(0, np.int64)
        assert np.array_equal(nb["closure"](n, u, v), npk["closure"](n, u, v))
        x = rng.random((n, 5)) < 0.3
        y = rng.random((5, 7)) < 0.3
        assert np.array_equal(nb["compose"](x, y), npk["compose"](x, y))


@pytest.mark.parametrize("n,ka,kb", [(300, 150, 150), (300, 2000, 3), (2000, 1900, 1900), (50, 10**9, 10**9)])
def test_meet_and_canonical_wide_labels(n, ka, kb):
    # exercises the table, counting-sort and sorting paths
    nb, npk = kernels.NUMBA_KERNELS, kernels.NUMPY_KERNELS
    rng = np.random.default_rng(n + ka)
    a = rng.integers(-ka, ka, n).astype(np.int64)
    b = rng.integers(-kb, kb, n).astype(np.int64)
    assert np.array_equal(nb["canonical"](a), npk["canonical"](a))
    assert np.array_equal(nb["meet"](a, b), npk["meet"](a, b))
    ca, cb = npk["canonical"](a), npk["canonical"](b)
    assert np.array_equal(nb["meet"](ca, cb), npk["meet"](ca, cb))
    # the meet separates exactly the pairs that differ in a or in b
    m = nb["meet"](a, b)
    same = (m[:, None] == m[None, :])
    assert np.array_equal(same, (a[:, None] == a[None, :]) & (b[:, None] == b[None, :]))


def test_canonical_is_first_occurrence():
    out = kernels.canonical_labels([7, 3, 7, 9, 3])
    assert out.tolist() == [0, 1, 0, 2, 1]


def test_refines_witness_first_pair():
    a = kernels.canonical_labels([0, 0, 1, 1])
    assert kernels.refines_witness(a, [0, 0, 1, 1]) == (-1, -1)
    assert kernels.refines_witness(a, [0, 0, 1, 2]) == (2, 3)


def test_closure_roots_are_block_minima():
    out = kernels.closure_labels(5, [4, 1], [2, 3])
    assert out.tolist() == [0, 1, 2, 1, 2]


def test_backend_flag():
    env = dict(os.environ, COFINITE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import cofinite; print(cofinite.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    assert backend() == ("numba" if HAVE_NUMBA and not os.environ.get("COFINITE_DISABLE_NUMBA") else "numpy")


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba missing")
def test_numpy_backend_runs_a_workload():
    code = ("from cofinite import phi1_system, boundary_census;"
            "r = boundary_census(phi1_system(), 10, 5); print(r.total_ends)")
    env = dict(os.environ, COFINITE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "4"
