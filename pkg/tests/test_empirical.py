import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from niqcd.empirical import SortedSample, log_returns, median_iqr, skewness_kurtosis
from niqcd.errors import DataError


class TestSortedSample:
    def test_from_values_sorts(self):
        s = SortedSample.from_values([3.0, 1.0, 2.0])
        assert np.array_equal(s.values, [1.0, 2.0, 3.0])
        assert s.n == 3

    def test_rejects_nonfinite(self):
        with pytest.raises(DataError):
            SortedSample.from_values([1.0, float("nan")])

    def test_rejects_unsorted_direct(self):
        with pytest.raises(DataError):
            SortedSample(np.array([2.0, 1.0]))


class TestEcdf:
    def test_direct_count(self):
        s = SortedSample.from_values([1.0, 2.0, 3.0])
        assert s.ecdf(2.0) == pytest.approx(2.0 / 3.0)

    def test_below_min_and_at_max(self):
        s = SortedSample.from_values([1.0, 2.0, 3.0])
        assert s.ecdf(0.5) == 0.0
        assert s.ecdf(3.0) == 1.0

    def test_order_statistics_exact(self):
        rng = np.random.default_rng(0)
        s = SortedSample.from_values(rng.normal(size=40))
        for i in range(1, s.n + 1):
            assert s.ecdf(s.order_quantile(i)) == i / s.n

    def test_monotone(self):
        rng = np.random.default_rng(1)
        s = SortedSample.from_values(rng.standard_cauchy(size=200))
        ys = np.sort(rng.uniform(-50, 50, size=1000))
        vals = s.ecdf(ys)
        assert np.all(np.diff(vals) >= 0)


class TestOrderQuantile:
    def test_grid_indices(self):
        s = SortedSample.from_values(np.arange(1.0, 101.0))
        # quantile-grid index convention: floor(n*k/(m+1))
        assert s.order_quantile(100 * 1 // 11) == s.values[8]

    def test_max_and_exact(self):
        s = SortedSample.from_values([10.0, 20.0, 30.0])
        assert s.order_quantile(3) == 30.0
        assert s.order_quantile(2) == 20.0

    def test_clamps(self):
        s = SortedSample.from_values([10.0, 20.0, 30.0])
        assert s.order_quantile(0) == 10.0
        assert s.order_quantile(99) == 30.0


class TestMedianIqr:
    def test_even_median(self):
        med, _ = median_iqr([1.0, 2.0, 3.0, 4.0])
        assert med == pytest.approx(2.5)

    def test_singleton(self):
        assert median_iqr([5.0]) == (5.0, 0.0)

    def test_iqr_interpolation_oracle(self):
        values = np.arange(1.0, 101.0)

        def type7(p):
            h = (len(values) - 1) * p
            lo = int(np.floor(h))
            return values[lo] + (h - lo) * (values[min(lo + 1, len(values) - 1)] - values[lo])

        _, iqr = median_iqr(values)
        assert iqr == pytest.approx(type7(0.75) - type7(0.25), abs=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            median_iqr([])


class TestSkewnessKurtosis:
    def test_symmetric_is_unskewed(self):
        b1, _ = skewness_kurtosis([-1.0, 0.0, 1.0])
        assert b1 == pytest.approx(0.0, abs=1e-12)

    def test_normal_excess_kurtosis(self):
        g = np.random.default_rng(7).standard_normal(100_000)
        _, g2 = skewness_kurtosis(g)
        assert abs(g2) < 0.1

    def test_affine_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.exponential(size=500)
        b1, g2 = skewness_kurtosis(x)
        b1b, g2b = skewness_kurtosis(3.5 * x + 11.0)
        assert b1b == pytest.approx(b1, abs=1e-10)
        assert g2b == pytest.approx(g2, abs=1e-10)

    def test_constant_rejected(self):
        with pytest.raises(DataError):
            skewness_kurtosis([2.0, 2.0, 2.0])


class TestLogReturns:
    def test_direct_formula(self):
        out = log_returns([100.0, 110.0])
        assert out == pytest.approx([np.log(1.1)])

    def test_constant_prices(self):
        assert np.allclose(log_returns([7.0, 7.0, 7.0]), 0.0)

    def test_halving(self):
        assert log_returns([100.0, 50.0]) == pytest.approx([-np.log(2.0)])

    def test_nonpositive_price_reports_index(self):
        with pytest.raises(DataError, match="index 1"):
            log_returns([1.0, -2.0, 3.0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=40))
    def test_round_trip(self, rets):
        r = np.asarray(rets)
        prices = np.exp(np.concatenate([[0.0], np.cumsum(r)]))
        assert np.allclose(log_returns(prices), r, atol=1e-12)
