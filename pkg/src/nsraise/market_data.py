"""Quote ingestion, IRS bootstrapping, par swap rates and daily curve snapshots.

Quote CSV layout (header required)::

    date,instrument,maturity,rate,unit
    2011-08-02,OIS,1M,1.2037,percent
    2011-08-02,IRS,10Y,2.913,percent

OIS tenors are ``1M``..``11M``; IRS tenors ``1Y``..``30Y``.  Rates are
stored as decimals after parsing.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import re
import warnings
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .basis import ShapeParams, curve_rates
from .errors import ArbitrageError, BootstrapError, DomainError, QuoteParseError

log = logging.getLogger(__name__)

QUOTE_HEADER = ("date", "instrument", "maturity", "rate", "unit")
_TENOR = re.compile(r"^\s*(\d+)\s*([MY])\s*$", re.IGNORECASE)

FIT_IRS_YEARS = 10
HOLDOUT_YEARS = 30


class Instrument(str, Enum):
    OIS = "OIS"
    IRS = "IRS"


class Compounding(str, Enum):
    ANNUAL = "annual"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Quote:
    date: dt.date
    instrument: Instrument
    tenor: str
    maturity: float
    rate: float

    @property
    def years(self) -> int | None:
        """Whole-year tenor for IRS quotes."""
        return int(self.tenor[:-1]) if self.tenor.endswith("Y") else None


@dataclass(frozen=True)
class CurveSnapshot:
    date: dt.date
    maturities: np.ndarray
    rates: np.ndarray
    holdout_30y: float | None = None

    def __post_init__(self):
        tau = np.array(self.maturities, dtype=np.float64)
        r = np.array(self.rates, dtype=np.float64)
        if tau.shape != r.shape or tau.ndim != 1:
            raise DomainError("maturities and rates must be equal-length vectors")
        if np.any(np.diff(tau) <= 0):
            raise DomainError("snapshot maturities must be strictly ascending")
        tau.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "maturities", tau)
        object.__setattr__(self, "rates", r)

    @property
    def n(self) -> int:
        return self.maturities.size

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.maturities.tolist(), self.rates.tolist()))

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "points": [{"tau_years": t, "rate": r} for t, r in self.points],
            "holdout_30y": self.holdout_30y,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CurveSnapshot:
        pts = d["points"]
        return cls(
            dt.date.fromisoformat(d["date"]),
            [p["tau_years"] for p in pts],
            [p["rate"] for p in pts],
            d.get("holdout_30y"),
        )


# --- parsing ------------------------------------------------------------------


def parse_tenor(token: str, instrument: Instrument) -> tuple[str, float]:
    m = _TENOR.match(token)
    if not m:
        raise ValueError(f"bad maturity token {token!r}")
    count, unit = int(m.group(1)), m.group(2).upper()
    if instrument is Instrument.OIS:
        if unit != "M" or not 1 <= count <= 11:
            raise ValueError(f"OIS maturity must be 1M..11M, got {token!r}")
        return f"{count}M", count / 12.0
    if unit != "Y" or not 1 <= count <= 30:
        raise ValueError(f"IRS maturity must be 1Y..30Y, got {token!r}")
    return f"{count}Y", float(count)


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, io.BufferedIOBase) or hasattr(source, "mode") and "b" in getattr(source, "mode", ""):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def parse_quotes(source) -> list[Quote]:
    """Read and validate a quote CSV from a path, bytes, or a file object."""
    fh = _open_text(source)
    close = isinstance(source, (str, Path))
    try:
        rows = list(csv.reader(fh))
    finally:
        if close:
            fh.close()
    quotes = []
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "date":
            if tuple(c.strip().lower() for c in row) != QUOTE_HEADER:
                raise QuoteParseError(f"unexpected header {row}", 1)
            continue
        if len(row) != 5:
            raise QuoteParseError(f"expected 5 fields, got {len(row)}", lineno)
        date_s, inst_s, mat_s, rate_s, unit_s = (c.strip() for c in row)
        try:
            date = dt.date.fromisoformat(date_s)
        except ValueError:
            raise QuoteParseError(f"bad date {date_s!r}", lineno) from None
        try:
            inst = Instrument(inst_s.upper())
        except ValueError:
            raise QuoteParseError(f"unknown instrument {inst_s!r}", lineno) from None
        try:
            tenor, tau = parse_tenor(mat_s, inst)
        except ValueError as exc:
            raise QuoteParseError(str(exc), lineno) from None
        try:
            rate = float(rate_s)
        except ValueError:
            raise QuoteParseError(f"bad rate {rate_s!r}", lineno) from None
        if not np.isfinite(rate):
            raise QuoteParseError(f"non-finite rate {rate_s!r}", lineno)
        unit = unit_s.lower()
        if unit == "percent":
            rate /= 100.0
        elif unit != "decimal":
            raise QuoteParseError(f"unit must be percent or decimal, got {unit_s!r}", lineno)
        quotes.append(Quote(date, inst, tenor, tau, rate))
    if not quotes:
        warnings.warn("quote source contained no data rows", stacklevel=2)
    return quotes


def write_quotes(quotes: Iterable[Quote], path, unit: str = "percent") -> None:
    scale = 100.0 if unit == "percent" else 1.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(QUOTE_HEADER)
        for q in quotes:
            w.writerow([q.date.isoformat(), q.instrument.value, q.tenor, repr(q.rate * scale), unit])


# --- discounting --------------------------------------------------------------


def discount_factor(rate, t, compounding: Compounding = Compounding.ANNUAL):
    rate = np.asarray(rate, dtype=np.float64)
    if Compounding(compounding) is Compounding.CONTINUOUS:
        return np.exp(-rate * t)
    if np.any(rate <= -1.0):
        raise DomainError("annually compounded rate at or below -100%")
    return (1.0 + rate) ** (-np.asarray(t, dtype=np.float64))


def zero_from_discount(df, t, compounding: Compounding = Compounding.ANNUAL):
    df = np.asarray(df, dtype=np.float64)
    if Compounding(compounding) is Compounding.CONTINUOUS:
        return -np.log(df) / t
    return df ** (-1.0 / np.asarray(t, dtype=np.float64)) - 1.0


def bootstrap_zero_curve(par_rates: Mapping[int, float], compounding=Compounding.ANNUAL) -> dict[int, float]:
    """Zero rates from annual-pay par swap rates for years 1..Y.

    ``D(n) = (1 - s_n * sum_{i<n} D(i)) / (1 + s_n)``.
    """
    years = sorted(int(y) for y in par_rates)
    if not years:
        return {}
    if years != list(range(1, years[-1] + 1)):
        missing = sorted(set(range(1, years[-1] + 1)) - set(years))
        raise BootstrapError(f"par curve has gaps at years {missing}")
    zeros = {}
    annuity = 0.0
    for n in years:
        s = float(par_rates[n])
        d = (1.0 - s * annuity) / (1.0 + s)
        if not 0.0 < d < 2.0:
            raise ArbitrageError(f"discount factor {d} at year {n} outside (0, 2)")
        annuity += d
        zeros[n] = float(zero_from_discount(d, n, compounding))
    return zeros


def par_rates_from_zero_curve(zeros: Mapping[int, float], compounding=Compounding.ANNUAL) -> dict[int, float]:
    """Inverse of :func:`bootstrap_zero_curve`."""
    years = sorted(int(y) for y in zeros)
    out = {}
    annuity = 0.0
    for n in years:
        d = float(discount_factor(zeros[n], n, compounding))
        annuity += d
        out[n] = (1.0 - d) / annuity
    return out


def par_swap_rate(zero_rates, compounding=Compounding.ANNUAL) -> float:
    """Par rate of an annual-pay swap given zero rates at years 1..T."""
    z = np.asarray(zero_rates, dtype=np.float64)
    t = np.arange(1, z.size + 1, dtype=np.float64)
    d = discount_factor(z, t, compounding)
    # 1 - D(T) through expm1 so near-zero rates keep full precision
    if Compounding(compounding) is Compounding.CONTINUOUS:
        one_minus = -np.expm1(-z[-1] * t[-1])
    else:
        one_minus = -np.expm1(-t[-1] * np.log1p(z[-1]))
    return float(one_minus / d.sum())


def swap_rate_from_curve(fit, shape: ShapeParams | None = None, maturity_years: int = HOLDOUT_YEARS,
                         compounding=Compounding.ANNUAL) -> float:
    """Par swap rate implied by a fitted curve, annual fixed payments."""
    shape = shape or fit.shape
    if shape is None:
        raise DomainError("fit carries no shape parameters; pass shape explicitly")
    if maturity_years < 1:
        raise DomainError("swap maturity must be at least one year")
    t = np.arange(1, int(maturity_years) + 1, dtype=np.float64)
    z = curve_rates(fit.beta, shape, t)
    if Compounding(compounding) is Compounding.ANNUAL and np.any(z <= -1.0):
        raise DomainError("fitted zero rate at or below -100%")
    return par_swap_rate(z, compounding)


# --- panel --------------------------------------------------------------------


@dataclass(frozen=True)
class PanelFlag:
    date: dt.date
    reason: str


def build_panel(quotes: Iterable[Quote], *, min_points: int = 5, fit_years: int = FIT_IRS_YEARS,
                holdout_years: int = HOLDOUT_YEARS, compounding=Compounding.ANNUAL):
    """Group quotes into daily snapshots.

    Returns ``(snapshots, flags)``: snapshots in date order, and one flag per
    excluded or incomplete date.  OIS quotes enter as zero rates; IRS 1..fit_years
    are bootstrapped; the ``holdout_years`` IRS par rate is kept aside.
    """
    by_date: dict[dt.date, list[Quote]] = defaultdict(list)
    for q in quotes:
        by_date[q.date].append(q)
    snaps, flags = [], []
    for date in sorted(by_date):
        ois, irs, holdout, dup = {}, {}, None, False
        for q in by_date[date]:
            if q.instrument is Instrument.OIS:
                dup |= q.maturity in ois
                ois[q.maturity] = q.rate
            elif q.years == holdout_years:
                dup |= holdout is not None
                holdout = q.rate
            elif q.years <= fit_years:
                dup |= q.years in irs
                irs[q.years] = q.rate
        if dup:
            flags.append(PanelFlag(date, "duplicate quotes"))
            continue
        if not ois or not irs:
            flags.append(PanelFlag(date, "incomplete: missing " + ("OIS" if not ois else "IRS") + " segment"))
            continue
        try:
            zeros = bootstrap_zero_curve(irs, compounding)
        except BootstrapError as exc:
            flags.append(PanelFlag(date, f"bootstrap failed: {exc}"))
            continue
        tau = sorted(ois) + [float(y) for y in sorted(zeros)]
        rates = [ois[t] for t in sorted(ois)] + [zeros[y] for y in sorted(zeros)]
        if len(tau) < min_points:
            flags.append(PanelFlag(date, f"only {len(tau)} points"))
            continue
        snaps.append(CurveSnapshot(date, tau, rates, holdout))
    for f in flags:
        log.warning("%s excluded: %s", f.date, f.reason)
    return snaps, flags


def write_snapshots_json(snapshots: Iterable[CurveSnapshot], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([s.to_dict() for s in snapshots], fh, indent=1)
        fh.write("\n")


def read_snapshots_json(path) -> list[CurveSnapshot]:
    with open(path, encoding="utf-8") as fh:
        return [CurveSnapshot.from_dict(d) for d in json.load(fh)]
