"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba implementations are used when numba imports cleanly and the
environment variable ``NSRAISE_DISABLE_NUMBA`` is unset or ``0``.  Both
paths are always importable under explicit names so they can be tested and
benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np

# below this x = tau/lambda the curvature loading is evaluated by its series
SERIES_CUTOFF = 1e-4


def _numba_requested() -> bool:
    flag = os.environ.get("NSRAISE_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


# --- numpy --------------------------------------------------------------------


def slope_curvature_numpy(x):
    """Slope and curvature loadings as functions of ``x = tau / lambda``."""
    x = np.asarray(x, dtype=np.float64)
    ex = np.exp(-x)
    safe = np.where(x > 0.0, x, 1.0)
    slope = np.where(x > 0.0, -np.expm1(-x) / safe, 1.0)
    curv = slope - ex
    small = x < SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        curv[small] = xs * (0.5 + xs * (-1.0 / 3.0 + xs * (1.0 / 8.0 - xs / 30.0)))
    return slope, curv


def sse_grid_numpy(bases, valid, y):
    """Residual sum of squares of ``y`` against each orthonormal basis.

    ``bases`` has shape (G, n, p) with orthonormal columns per grid point;
    entries where ``valid`` is False get ``inf``.
    """
    coef = np.einsum("gij,i->gj", bases, y)
    resid = y[None, :] - np.einsum("gij,gj->gi", bases, coef)
    sse = np.einsum("gi,gi->g", resid, resid)
    sse[~valid] = np.inf
    return sse


# --- numba --------------------------------------------------------------------

try:  # pragma: no cover - exercised only when numba is importable
    from numba import njit

    @njit(cache=True)
    def _slope_curvature_nb(x):
        n = x.size
        slope = np.empty(n)
        curv = np.empty(n)
        for i in range(n):
            xi = x[i]
            if xi > 0.0:
                s = -np.expm1(-xi) / xi
            else:
                s = 1.0
            if xi < SERIES_CUTOFF:
                c = xi * (0.5 + xi * (-1.0 / 3.0 + xi * (1.0 / 8.0 - xi / 30.0)))
            else:
                c = s - np.exp(-xi)
            slope[i] = s
            curv[i] = c
        return slope, curv

    @njit(cache=True)
    def _sse_grid_nb(bases, valid, y):
        G, n, p = bases.shape
        out = np.empty(G)
        coef = np.empty(p)
        for g in range(G):
            if not valid[g]:
                out[g] = np.inf
                continue
            for j in range(p):
                acc = 0.0
                for i in range(n):
                    acc += bases[g, i, j] * y[i]
                coef[j] = acc
            s = 0.0
            for i in range(n):
                r = y[i]
                for j in range(p):
                    r -= bases[g, i, j] * coef[j]
                s += r * r
            out[g] = s
        return out

    def slope_curvature_numba(x):
        x = np.asarray(x, dtype=np.float64)
        slope, curv = _slope_curvature_nb(np.ascontiguousarray(x.ravel()))
        return slope.reshape(x.shape), curv.reshape(x.shape)

    def sse_grid_numba(bases, valid, y):
        return _sse_grid_nb(
            np.ascontiguousarray(bases, dtype=np.float64),
            np.ascontiguousarray(valid, dtype=np.bool_),
            np.ascontiguousarray(y, dtype=np.float64),
        )

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    slope_curvature_numba = None
    sse_grid_numba = None
    HAVE_NUMBA = False


if HAVE_NUMBA and _numba_requested():
    BACKEND = "numba"
    slope_curvature = slope_curvature_numba
    sse_grid = sse_grid_numba
else:
    BACKEND = "numpy"
    slope_curvature = slope_curvature_numpy
    sse_grid = sse_grid_numpy
