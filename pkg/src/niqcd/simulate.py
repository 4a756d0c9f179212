"""Seeded simulation harness: generate the six benchmark settings, run
repeated fits, and aggregate detection rate, goodness of fit, and timing.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import Family, MixtureModel
from .empirical import SortedSample
from .errors import DataError
from .estimation import FitConfig, fit_iqcd, fit_niqcd
from .gof import ad_test

__all__ = [
    "Setting",
    "SETTING_IDS",
    "make_setting",
    "ExperimentResult",
    "run_experiment",
    "emit_report",
]

SETTING_IDS = ("S1", "S2", "S3", "S4", "S5", "S6")

# Three Cauchy components each; high/medium/low separation crossed with
# equal and unequal weights.
_SETTING_PARAMS = {
    "S1": ((-5.0, 0.0, 5.0), (0.1, 0.1, 0.1), (0.33, 0.33, 0.34)),
    "S2": ((-0.5, 0.0, 0.5), (0.5, 0.5, 0.5), (0.33, 0.33, 0.34)),
    "S3": ((-0.5, 0.0, 0.5), (3.0, 3.0, 3.0), (0.33, 0.33, 0.34)),
    "S4": ((-5.0, 0.0, 5.0), (0.1, 0.1, 0.1), (0.2, 0.3, 0.5)),
    "S5": ((-0.5, 0.0, 0.5), (0.5, 0.5, 0.5), (0.2, 0.3, 0.5)),
    "S6": ((-0.5, 0.0, 0.5), (3.0, 3.0, 3.0), (0.2, 0.3, 0.5)),
}


@dataclass(frozen=True)
class Setting:
    id: str
    model: MixtureModel


def make_setting(setting_id: str) -> Setting:
    """The exact benchmark generator for one of S1..S6."""
    try:
        mu, sigma, weights = _SETTING_PARAMS[setting_id]
    except KeyError:
        raise DataError(f"unknown setting {setting_id!r}; "
                        f"expected one of {list(SETTING_IDS)}") from None
    model = MixtureModel(Family.CAUCHY, np.array(mu), np.array(sigma),
                         np.array(weights))
    return Setting(id=setting_id, model=model)


@dataclass(frozen=True)
class ExperimentResult:
    setting_id: str
    method_id: str
    n: int
    reps: int
    detection_rate: float
    mhat_histogram: dict[int, int]
    p_mean: float
    p_se: float
    time_mean_s: float
    time_se_s: float


_FITTERS = {"NIQCD": fit_niqcd, "IQCD": fit_iqcd}


def _mean_se(values: list[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values)
    if len(arr) == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(len(arr)))


def run_experiment(setting: Setting, method: str, n: int, reps: int,
                   base_seed: int, cfg: FitConfig | None = None,
                   threads: int = 1) -> ExperimentResult:
    """Fit ``reps`` fresh samples of size ``n`` and aggregate.

    Replicate r (r = 0..reps-1) samples with seed ``base_seed + r``, so any
    single replicate can be reproduced in isolation. Timing covers the fit
    call only; the AD p-value uses the asymptotic reference. A replicate
    whose fit raises is counted in the histogram under m-hat = 0 and
    excluded from the p/time means.
    """
    if reps < 1:
        raise DataError("reps must be >= 1")
    method_id = method.upper()
    if method_id not in _FITTERS:
        raise DataError(f"unknown method {method!r}; expected niqcd or iqcd")
    fit = _FITTERS[method_id]
    cfg = cfg or FitConfig()
    family = setting.model.family

    def one(r: int) -> tuple[int, float | None, float | None]:
        sample = SortedSample.from_values(setting.model.sample(n, base_seed + r))
        t0 = time.perf_counter()
        try:
            report = fit(sample, cfg, family)
        except Exception:
            return 0, None, None
        elapsed = time.perf_counter() - t0
        p = ad_test(sample, report.model, method="asymptotic_case0").p_value
        return report.model.m, p, elapsed

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(reps)))
    else:
        rows = [one(r) for r in range(reps)]

    histogram: dict[int, int] = {}
    p_values: list[float] = []
    times: list[float] = []
    for m_hat, p, elapsed in rows:
        histogram[m_hat] = histogram.get(m_hat, 0) + 1
        if p is not None:
            p_values.append(p)
            times.append(elapsed)
    p_mean, p_se = _mean_se(p_values)
    t_mean, t_se = _mean_se(times)
    return ExperimentResult(
        setting_id=setting.id, method_id=method_id, n=n, reps=reps,
        detection_rate=histogram.get(3, 0) / reps,
        mhat_histogram=dict(sorted(histogram.items())),
        p_mean=p_mean, p_se=p_se, time_mean_s=t_mean, time_se_s=t_se)


_CSV_HEADER = ("setting", "method", "n", "reps", "detection_rate",
               "p_mean", "p_se", "time_mean_s", "time_se_s")


def emit_report(results: list[ExperimentResult], path) -> Path:
    """Write the aggregate CSV plus a JSON sidecar with full histograms.

    The sidecar sits next to the CSV with a .json suffix; row order is the
    input order.
    """
    if not results:
        raise DataError("emit_report needs at least one result")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for r in results:
            writer.writerow([r.setting_id, r.method_id, r.n, r.reps,
                             repr(r.detection_rate), repr(r.p_mean),
                             repr(r.p_se), repr(r.time_mean_s),
                             repr(r.time_se_s)])
    sidecar = path.with_suffix(".json")
    payload = [{
        "setting": r.setting_id,
        "method": r.method_id,
        "n": r.n,
        "reps": r.reps,
        "detection_rate": r.detection_rate,
        "mhat_histogram": {str(k): v for k, v in r.mhat_histogram.items()},
        "p_mean": r.p_mean,
        "p_se": r.p_se,
        "time_mean_s": r.time_mean_s,
        "time_se_s": r.time_se_s,
    } for r in results]
    with open(sidecar, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return path
