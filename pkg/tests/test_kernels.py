import os
import subprocess
import sys

import numpy as np
import pytest

from nsraise import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_slope_curvature_backends_agree():
    x = np.r_[np.geomspace(1e-12, 1e-3, 50), np.linspace(1e-3, 200, 500)]
    s_np, c_np = _kernels.slope_curvature_numpy(x)
    s_nb, c_nb = _kernels.slope_curvature_numba(x)
    np.testing.assert_allclose(s_nb, s_np, rtol=1e-15)
    np.testing.assert_allclose(c_nb, c_np, rtol=1e-14, atol=1e-300)


@needs_numba
def test_sse_grid_backends_agree(rng):
    G, n, p = 300, 21, 4
    raw = rng.standard_normal((G, n, p))
    bases = np.linalg.qr(raw)[0]
    valid = rng.random(G) > 0.1
    y = rng.standard_normal(n)
    a = _kernels.sse_grid_numpy(bases, valid, y)
    b = _kernels.sse_grid_numba(bases, valid, y)
    assert np.array_equal(np.isinf(a), ~valid) and np.array_equal(np.isinf(b), ~valid)
    np.testing.assert_allclose(b[valid], a[valid], rtol=1e-12)


def test_sse_grid_matches_lstsq(rng):
    G, n, p = 20, 21, 3
    raw = rng.standard_normal((G, n, p))
    bases = np.linalg.qr(raw)[0]
    y = rng.standard_normal(n)
    got = _kernels.sse_grid(bases, np.ones(G, bool), y)
    for g in range(G):
        _, res, _, _ = np.linalg.lstsq(raw[g], y, rcond=None)
        np.testing.assert_allclose(got[g], res[0], rtol=1e-10)


def test_series_branch_is_continuous():
    x = np.array([_kernels.SERIES_CUTOFF * (1 - 1e-9), _kernels.SERIES_CUTOFF * (1 + 1e-9)])
    _, c = _kernels.slope_curvature_numpy(x)
    assert abs(c[1] - c[0]) < 1e-12


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    env = dict(os.environ, NSRAISE_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from nsraise import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
