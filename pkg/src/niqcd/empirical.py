"""Order statistics, empirical CDF, robust summaries, and return transforms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "SortedSample",
    "median_iqr",
    "skewness_kurtosis",
    "log_returns",
]


@dataclass(frozen=True)
class SortedSample:
    """Ascending, finite observations with O(log n) eCDF/order-statistic access."""

    values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise DataError("sample must be a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise DataError("sample contains non-finite values")
        if np.any(np.diff(values) < 0):
            raise DataError("values are not sorted ascending")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", len(values))

    @classmethod
    def from_values(cls, values) -> "SortedSample":
        """Sort raw observations into a SortedSample."""
        arr = np.sort(np.asarray(values, dtype=float))
        return cls(arr)

    def ecdf(self, y):
        """F_n(y) = #{x_i <= y} / n, right-continuous; y scalar or array."""
        counts = np.searchsorted(self.values, y, side="right")
        out = counts / self.n
        return float(out) if np.isscalar(y) else out

    def order_quantile(self, idx: int) -> float:
        """The idx-th order statistic, 1-based; idx clamped into [1, n]."""
        idx = min(max(int(idx), 1), self.n)
        return float(self.values[idx - 1])

    @property
    def min(self) -> float:
        return float(self.values[0])

    @property
    def max(self) -> float:
        return float(self.values[-1])

    @property
    def range(self) -> float:
        return float(self.values[-1] - self.values[0])


def median_iqr(values) -> tuple[float, float]:
    """Median and interquartile range of a vector.

    Quartiles interpolate linearly between order statistics (the usual
    "type 7" rule); a singleton vector yields IQR 0.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise DataError("median_iqr needs a non-empty vector")
    med = float(np.median(arr))
    if len(arr) == 1:
        return med, 0.0
    q1, q3 = np.percentile(arr, [25.0, 75.0])
    return med, float(q3 - q1)


def skewness_kurtosis(values) -> tuple[float, float]:
    """Sample skewness b1 = m3/m2^(3/2) and excess kurtosis g2 = m4/m2^2 - 3.

    Central moments m_j use the 1/n convention. Needs at least three
    non-constant observations.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) < 3:
        raise DataError("skewness_kurtosis needs at least 3 observations")
    centered = arr - arr.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DataError("degenerate sample: all observations identical")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return m3 / m2**1.5, m4 / m2**2 - 3.0


def log_returns(prices) -> np.ndarray:
    """ln(p_t / p_{t-1}) for consecutive prices; length shrinks by one."""
    arr = np.asarray(prices, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise DataError("log_returns needs at least two prices")
    bad = np.nonzero(~(arr > 0) | ~np.isfinite(arr))[0]
    if len(bad):
        raise DataError(f"non-positive price at index {int(bad[0])}")
    return np.diff(np.log(arr))
