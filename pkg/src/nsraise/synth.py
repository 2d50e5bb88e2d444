"""Synthetic OIS/IRS quote panels generated from known NS/SV parameter paths."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .basis import Model, ShapeParams, curve_rates
from .market_data import (
    FIT_IRS_YEARS,
    HOLDOUT_YEARS,
    Compounding,
    Instrument,
    Quote,
    par_rates_from_zero_curve,
)

OIS_MONTHS = tuple(range(1, 12))
DEFAULT_START = dt.date(2011, 8, 2)


@dataclass(frozen=True)
class TruthRow:
    date: dt.date
    shape: ShapeParams
    beta: tuple[float, ...]


@dataclass(frozen=True)
class SyntheticPanel:
    quotes: list
    truth: list


def business_days(start: dt.date, count: int) -> list[dt.date]:
    out, d = [], start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def _ar1(rng, n, mean, phi, vol, start=None):
    x = np.empty(n)
    x[0] = mean if start is None else start
    for t in range(1, n):
        x[t] = mean + phi * (x[t - 1] - mean) + vol * rng.standard_normal()
    return x


def _bounded_walk(rng, n, start, vol, lo, hi):
    x = np.empty(n)
    x[0] = start
    for t in range(1, n):
        v = x[t - 1] + vol * rng.standard_normal()
        if v < lo:
            v = 2 * lo - v
        if v > hi:
            v = 2 * hi - v
        x[t] = v
    return x


def quotes_for_curve(date, beta, shape: ShapeParams, compounding=Compounding.ANNUAL,
                     noise=None) -> list[Quote]:
    """OIS zero quotes, IRS 1..10y par quotes and the 30y holdout for one true curve."""
    noise = noise if noise is not None else (lambda: 0.0)
    quotes = []
    for m in OIS_MONTHS:
        r = float(curve_rates(beta, shape, m / 12.0))
        quotes.append(Quote(date, Instrument.OIS, f"{m}M", m / 12.0, r + noise()))
    years = np.arange(1, HOLDOUT_YEARS + 1, dtype=np.float64)
    zeros = dict(zip(range(1, HOLDOUT_YEARS + 1), curve_rates(beta, shape, years).tolist()))
    par = par_rates_from_zero_curve(zeros, compounding)
    for y in list(range(1, FIT_IRS_YEARS + 1)) + [HOLDOUT_YEARS]:
        quotes.append(Quote(date, Instrument.IRS, f"{y}Y", float(y), par[y] + noise()))
    return quotes


def generate_panel(n_days: int, seed: int = 0, model: Model = Model.NS, noise_bp: float = 0.0,
                   on_grid: bool = True, grid_step: float = 0.05, start: dt.date = DEFAULT_START,
                   lambda_gap: tuple[float, float] = (1.0, 4.0),
                   compounding=Compounding.ANNUAL) -> SyntheticPanel:
    """Panel of daily quotes from mean-reverting betas and wandering shape parameters.

    ``lambda_gap`` bounds ``lambda2 - lambda1`` for SV; a narrow gap gives a
    near-collinear stress panel.
    """
    model = Model(model)
    rng = np.random.default_rng(seed)
    dates = business_days(start, n_days)
    b0 = _ar1(rng, n_days, 0.025, 0.995, 0.0004)
    b1 = _ar1(rng, n_days, -0.02, 0.995, 0.0004)
    b2 = _ar1(rng, n_days, -0.01, 0.99, 0.0008)
    b3 = _ar1(rng, n_days, 0.01, 0.99, 0.0008)
    lam1 = _bounded_walk(rng, n_days, 1.5, 0.03, 0.5, 3.0)
    gap = _bounded_walk(rng, n_days, float(np.mean(lambda_gap)), 0.03, *lambda_gap)
    sd = noise_bp * 1e-4

    def noise():
        return sd * rng.standard_normal() if sd > 0 else 0.0

    def snap(v):
        return round(round(v / grid_step) * grid_step, 12) if on_grid else float(v)

    quotes, truth = [], []
    for t, date in enumerate(dates):
        if model is Model.NS:
            shape = ShapeParams.ns(snap(lam1[t]))
            beta = (b0[t], b1[t], b2[t])
        else:
            l1 = snap(lam1[t])
            l2 = max(snap(lam1[t] + gap[t]), l1 + grid_step if on_grid else l1 + 1e-3)
            shape = ShapeParams.sv(l1, round(l2, 12))
            beta = (b0[t], b1[t], b2[t], b3[t])
        truth.append(TruthRow(date, shape, tuple(float(b) for b in beta)))
        quotes.extend(quotes_for_curve(date, beta, shape, compounding, noise))
    return SyntheticPanel(quotes, truth)


def write_truth(truth, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("date,model,lambda1,lambda2,beta0,beta1,beta2,beta3\n")
        for row in truth:
            b = list(row.beta) + [float("nan")] * (4 - len(row.beta))
            l2 = row.shape.lambda2 if row.shape.lambda2 is not None else float("nan")
            vals = [row.shape.lambda1, l2, *b]
            fh.write(",".join([row.date.isoformat(), row.shape.model.value] + [repr(float(v)) for v in vals]) + "\n")
