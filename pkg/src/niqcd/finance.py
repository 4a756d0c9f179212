"""Log-return regime workflow: ingest prices, fit, weekly refits, classify.

Returns are fitted on a x100 scale by default, which keeps the parameter
magnitudes in a readable range and matches how the trajectory and category
outputs are meant to be plotted.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import Family, MixtureModel
from .empirical import SortedSample, log_returns
from .errors import DataError
from .estimation import FitConfig, FitReport, fit_niqcd

__all__ = [
    "ReturnSeries",
    "CategorySeries",
    "read_price_csv",
    "ingest_prices",
    "classify",
    "weekly_refit",
    "write_trajectory_csv",
    "write_category_csv",
]

# Fewest returns allowed before the first weekly refit.
_MIN_TRAIN = 30


@dataclass(frozen=True)
class ReturnSeries:
    """Dated log returns (possibly x100-scaled); one entry per trading day."""

    dates: tuple[dt.date, ...]
    returns_x100: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.returns_x100):
            raise DataError("dates and returns length mismatch")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("dates must be strictly increasing")


@dataclass(frozen=True)
class CategorySeries:
    """Per-day regime labels: -1 bear, 0 neutral, 1 bull."""

    dates: tuple[dt.date, ...]
    categories: tuple[int, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.categories):
            raise DataError("dates and categories length mismatch")


def read_price_csv(path) -> tuple[list[dt.date], np.ndarray]:
    """Parse a `date,close` CSV: ISO dates, positive prices, ascending order.

    Blank lines are skipped; anything else malformed raises DataError with
    the offending line number.
    """
    dates: list[dt.date] = []
    closes: list[float] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if not dates and row[0].strip().lower() == "date":
                if [c.strip().lower() for c in row] != ["date", "close"]:
                    raise DataError(f"line {lineno}: header must be 'date,close'")
                continue
            if len(row) != 2:
                raise DataError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataError(f"line {lineno}: bad ISO date {row[0]!r}") from None
            try:
                close = float(row[1])
            except ValueError:
                raise DataError(f"line {lineno}: bad price {row[1]!r}") from None
            if not close > 0:
                raise DataError(f"line {lineno}: non-positive price {close}")
            if dates and day <= dates[-1]:
                raise DataError(f"line {lineno}: dates not strictly increasing")
            dates.append(day)
            closes.append(close)
    if len(dates) < 2:
        raise DataError("price CSV must contain at least two rows")
    return dates, np.asarray(closes)


def ingest_prices(path, scale100: bool = True) -> ReturnSeries:
    """Price CSV -> dated log returns; the first price yields no return."""
    dates, closes = read_price_csv(path)
    returns = log_returns(closes)
    if scale100:
        returns = 100.0 * returns
    return ReturnSeries(dates=tuple(dates[1:]), returns_x100=returns)


def classify(model: MixtureModel, returns: ReturnSeries,
             weighted: bool = True) -> CategorySeries:
    """Label each day by the component with the largest (weighted) density.

    With a three-component model the indices map onto -1/0/1, i.e.
    bear/neutral/bull by location order; ties go to the lower component.
    For any other component count the raw 1-based component index is
    emitted instead, with a warning.
    """
    r = np.asarray(returns.returns_x100, dtype=float)
    z = (r[:, None] - model.mu) / model.sigma
    dens = model.family.pdf(z) / model.sigma
    if weighted:
        dens = dens * model.weights
    labels = np.argmax(dens, axis=1)
    if model.m == 3:
        cats = labels - 1
    else:
        warnings.warn(f"model has {model.m} components, not 3; emitting raw "
                      "component indices", RuntimeWarning, stacklevel=2)
        cats = labels + 1
    return CategorySeries(dates=returns.dates,
                          categories=tuple(int(c) for c in cats))


def weekly_refit(returns: ReturnSeries, start_date: dt.date,
                 cfg: FitConfig | None = None,
                 family: Family = Family.CAUCHY,
                 threads: int = 1) -> list[tuple[dt.date, FitReport]]:
    """Refit on all returns up to each weekly boundary from ``start_date``.

    Boundaries fall every 7 calendar days and snap to the last trading day
    at or before them; each refit sees the full accumulated history (no
    state carries over between fits). Needs at least 30 returns before
    ``start_date``.
    """
    cfg = cfg or FitConfig()
    dates = returns.dates
    if not dates[0] <= start_date <= dates[-1]:
        raise DataError("start_date outside the return series range")
    n_before = sum(1 for d in dates if d < start_date)
    if n_before < _MIN_TRAIN:
        raise DataError(f"need at least {_MIN_TRAIN} returns before "
                        f"start_date, have {n_before}")

    boundaries = []
    day = start_date
    while day <= dates[-1]:
        boundaries.append(day)
        day += dt.timedelta(days=7)

    date_arr = np.array(dates)

    def one(boundary: dt.date) -> tuple[dt.date, FitReport]:
        upto = int(np.searchsorted(date_arr, boundary, side="right"))
        snapped = dates[upto - 1]
        sample = SortedSample.from_values(returns.returns_x100[:upto])
        return snapped, fit_niqcd(sample, cfg, family)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, boundaries))
    return [one(b) for b in boundaries]


def write_trajectory_csv(path, refits: list[tuple[dt.date, FitReport]]) -> Path:
    """Parameter trajectory as `date,mu1..mu3,sigma1..sigma3,lambda1..lambda3`.

    Fits with more than three components contribute their three heaviest
    components (reordered by location); fits with fewer leave the missing
    columns empty.
    """
    path = Path(path)
    header = (["date"] + [f"mu{i}" for i in (1, 2, 3)]
              + [f"sigma{i}" for i in (1, 2, 3)]
              + [f"lambda{i}" for i in (1, 2, 3)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for day, report in refits:
            model = report.model
            idx = np.argsort(model.weights, kind="stable")[::-1][:3]
            idx = idx[np.argsort(model.mu[idx], kind="stable")]
            cols = {"mu": model.mu[idx], "sigma": model.sigma[idx],
                    "lambda": model.weights[idx]}
            row = [day.isoformat()]
            for name in ("mu", "sigma", "lambda"):
                vals = [repr(float(v)) for v in cols[name]]
                vals += [""] * (3 - len(vals))
                row.extend(vals)
            writer.writerow(row)
    return path


def write_category_csv(path, cats: CategorySeries) -> Path:
    """Category series as `date,category`."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "category"])
        for day, cat in zip(cats.dates, cats.categories):
            writer.writerow([day.isoformat(), cat])
    return path
