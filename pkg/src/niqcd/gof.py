"""Anderson-Darling goodness of fit of a sample against a mixture CDF."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import MixtureModel
from .empirical import SortedSample
from .errors import DataError

__all__ = ["AdResult", "ad_statistic", "ad_test", "asymptotic_p_value"]

_F_CLAMP = 1e-15


@dataclass(frozen=True)
class AdResult:
    a2: float
    p_value: float
    method: str
    bootstrap_b: int | None = None

    def to_dict(self) -> dict:
        out = {"a2": self.a2, "p_value": self.p_value, "method": self.method}
        if self.bootstrap_b is not None:
            out["bootstrap_b"] = self.bootstrap_b
        return out


def ad_statistic(sample: SortedSample, cdf) -> float:
    """A^2 for a fully specified CDF.

    A^2 = -n - (1/n) * sum_i (2i-1) [ln F(x_(i)) + ln(1 - F(x_(n+1-i)))],
    with F clamped into [1e-15, 1 - 1e-15] before taking logs.
    """
    f = np.asarray(cdf(sample.values), dtype=float)
    if f.shape != (sample.n,):
        raise DataError("cdf must map the sample to one probability each")
    if np.any(np.diff(f) < 0):
        raise DataError("cdf probes are not monotone over the sample")
    f = np.clip(f, _F_CLAMP, 1.0 - _F_CLAMP)
    i = np.arange(1, sample.n + 1)
    s = np.sum((2 * i - 1) * (np.log(f) + np.log1p(-f[::-1])))
    return float(-sample.n - s / sample.n)


def asymptotic_p_value(a2: float) -> float:
    """Upper tail of the limiting null distribution of A^2 (case 0).

    Uses the two-branch polynomial fit of the limiting CDF accurate to a
    few 1e-6 over the whole range.
    """
    z = a2
    if z <= 0.0:
        return 1.0
    if z < 2.0:
        cdf = (math.exp(-1.2337141 / z) / math.sqrt(z)
               * (2.00012 + (0.247105 - (0.0649821 - (0.0347962
                  - (0.011672 - 0.00168691 * z) * z) * z) * z) * z))
    else:
        cdf = math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433
                       - (0.008056 - 0.0003146 * z) * z) * z) * z) * z))
    return float(min(max(1.0 - cdf, 0.0), 1.0))


def ad_test(sample: SortedSample, model: MixtureModel,
            method: str = "asymptotic_case0", bootstrap_b: int = 499,
            seed: int | None = None, threads: int = 1) -> AdResult:
    """Test the sample against the model's CDF.

    ``asymptotic_case0`` treats the model as fully specified and reads the
    p-value off the limiting A^2 distribution. ``parametric_bootstrap``
    draws ``bootstrap_b`` replicates from the model (no refitting, which
    makes it mildly anti-conservative when the model was estimated from
    this sample) and reports p = (1 + #{A2_rep >= A2_obs}) / (b + 1).
    Replicates take seeds spawned deterministically from ``seed`` and may
    be evaluated on ``threads`` workers; the reduction is order-fixed.
    """
    a2 = ad_statistic(sample, model.cdf)
    if method == "asymptotic_case0":
        return AdResult(a2=a2, p_value=asymptotic_p_value(a2),
                        method=method)
    if method != "parametric_bootstrap":
        raise DataError(f"unknown AD test method {method!r}")
    if bootstrap_b < 199:
        raise DataError("parametric bootstrap needs b >= 199")
    if seed is None:
        raise DataError("parametric bootstrap needs a seed")

    children = np.random.SeedSequence(seed).spawn(bootstrap_b)

    def one(child) -> float:
        draws = model.sample(sample.n, child)
        return ad_statistic(SortedSample.from_values(draws), model.cdf)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(one, children))
    else:
        stats = [one(c) for c in children]
    exceed = sum(1 for s in stats if s >= a2)
    p = (1.0 + exceed) / (bootstrap_b + 1.0)
    return AdResult(a2=a2, p_value=p, method=method, bootstrap_b=bootstrap_b)
