"""Compare the numba and pure-numpy kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

The kernels are timed in-process; the end-to-end SV day is timed in
subprocesses with NSRAISE_DISABLE_NUMBA set to 0 and 1 so the whole
package picks up the backend.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nsraise import _kernels
from nsraise.basis import Model
from nsraise.calibration import CalibrationConfig, shape_grid

MARKET_TAUS = np.r_[np.arange(1, 12) / 12.0, np.arange(1, 11, dtype=float)]

SV_DAY = """
import time
import numpy as np
from nsraise import _kernels
from nsraise.basis import Model
from nsraise.calibration import CalibrationConfig, estimate_series, _grid_bases
from nsraise.market_data import build_panel
from nsraise.synth import generate_panel
snaps, _ = build_panel(generate_panel({days}, seed=1, model=Model.SV, noise_bp=1.0).quotes)
cfg = CalibrationConfig(model=Model.SV)
estimate_series(snaps[:1], cfg)  # compile and cache the grid bases
t0 = time.perf_counter()
estimate_series(snaps, cfg)
print(_kernels.BACKEND, (time.perf_counter() - t0) / len(snaps))
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_in_process(repeat):
    rng = np.random.default_rng(0)
    shapes = shape_grid(CalibrationConfig(model=Model.SV))
    x = MARKET_TAUS[None, :] / shapes[:, :1]
    bases = np.linalg.qr(rng.standard_normal((shapes.shape[0], MARKET_TAUS.size, 4)))[0]
    bases = np.ascontiguousarray(bases)
    valid = np.ones(len(bases), dtype=bool)
    y = rng.standard_normal(MARKET_TAUS.size)

    rows = [("slope_curvature", x.size, lambda: _kernels.slope_curvature_numpy(x),
             lambda: _kernels.slope_curvature_numba(x)),
            ("sse_grid (SV)", len(bases), lambda: _kernels.sse_grid_numpy(bases, valid, y),
             lambda: _kernels.sse_grid_numba(bases, valid, y))]
    print(f"{'kernel':<18}{'size':>8}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}")
    for name, size, f_np, f_nb in rows:
        t_np = best(f_np, repeat)
        if _kernels.HAVE_NUMBA:
            f_nb()  # compile
            t_nb = best(f_nb, repeat)
            print(f"{name:<18}{size:>8}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<18}{size:>8}{t_np * 1e3:>12.3f}{'n/a':>12}")


def bench_sv_day(days):
    print(f"\nSV estimation, mean seconds per day over {days} days")
    for flag in ("1", "0"):
        env = dict(os.environ, NSRAISE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SV_DAY.format(days=days)], env=env,
                             capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<6} {float(secs) * 1e3:8.2f} ms")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--days", type=int, default=40)
    args = ap.parse_args(argv)
    print(f"numba available: {_kernels.HAVE_NUMBA}")
    bench_in_process(args.repeat)
    bench_sv_day(args.days)


if __name__ == "__main__":
    main()
