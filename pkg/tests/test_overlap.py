import math

import numpy as np
import pytest

from niqcd.distributions import Family, MixtureModel
from niqcd.errors import DataError, IntegrationError
from niqcd.overlap import (DIVERGENT_DENOMINATOR, UNDEFINED_HEAVY_TAIL, bcd,
                           dol, integrate_real_line, overlap_report, rbcd,
                           wdol)

from conftest import cauchy_model, random_model


def component(family, mu, sigma):
    return lambda x: float(family.pdf((x - mu) / sigma)) / sigma


class TestIntegrate:
    def test_standard_cauchy_normalizes(self):
        value, err = integrate_real_line(component(Family.CAUCHY, 0.0, 1.0))
        assert value == pytest.approx(1.0, abs=1e-8)
        assert err <= 1e-8

    def test_s1_mixture_normalizes(self, s1_model):
        value, _ = integrate_real_line(lambda x: float(s1_model.pdf(x)))
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_min_of_identical_pdfs(self):
        g = component(Family.CAUCHY, 0.0, 1.0)
        value, _ = integrate_real_line(lambda x: min(g(x), g(x)))
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(DataError):
            integrate_real_line(lambda x: 0.0, abs_tol=0.0)

    def test_nonconvergence_carries_partial(self):
        # a discontinuous integrand never meets a tolerance this tight
        with pytest.raises(IntegrationError) as exc:
            integrate_real_line(lambda x: 1.0 if 0.0 < x < 1.0 else 0.0,
                                abs_tol=1e-300)
        assert math.isfinite(exc.value.partial)


class TestDol:
    def test_identical_components(self):
        g = component(Family.CAUCHY, 0.0, 1.0)
        assert dol(g, g) == pytest.approx(1.0, abs=1e-6)

    def test_far_separated_components(self):
        g1 = component(Family.CAUCHY, 0.0, 1.0)
        g2 = component(Family.CAUCHY, 1e6, 1.0)
        assert dol(g1, g2) == pytest.approx(0.0, abs=1e-5)

    def test_second_form_identity(self):
        # DOL = 1 - 0.5 * integral |g1 - g2|
        g1 = component(Family.CAUCHY, -0.5, 3.0)
        g2 = component(Family.CAUCHY, 0.5, 3.0)
        direct = dol(g1, g2, abs_tol=1e-8)
        absdiff, _ = integrate_real_line(lambda x: abs(g1(x) - g2(x)), 1e-8)
        assert direct == pytest.approx(1.0 - 0.5 * absdiff, abs=4e-8)


class TestWdol:
    def test_published_separation_labels(self):
        s1 = cauchy_model([-5, 0, 5], [0.1, 0.1, 0.1], [0.33, 0.33, 0.34])
        s3 = cauchy_model([-0.5, 0, 0.5], [3, 3, 3], [0.33, 0.33, 0.34])
        assert wdol(s1) == pytest.approx(0.01, abs=0.02)
        assert wdol(s3) == pytest.approx(0.89, abs=0.02)

    def test_identical_components_any_weights(self):
        m = cauchy_model([1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [0.2, 0.3, 0.5])
        assert wdol(m) == pytest.approx(1.0, abs=1e-6)

    def test_zero_weight_rejected(self):
        m = MixtureModel(Family.CAUCHY, np.array([0.0, 1.0]),
                         np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        with pytest.raises(DataError):
            wdol(m)

    def test_bounds_on_random_models(self):
        rng = np.random.default_rng(71)
        for _ in range(200):
            m = random_model(rng)
            if np.any(m.weights <= 0):
                continue
            v = wdol(m, abs_tol=1e-6)
            assert -1e-9 <= v <= 1.0 + 1e-9

    def test_affine_invariance(self):
        m = cauchy_model([-1.0, 0.5], [0.7, 1.3], [0.4, 0.6])
        base = wdol(m, abs_tol=1e-9)
        for c, d in ((2.0, 3.0), (0.25, -7.0)):
            mapped = MixtureModel(m.family, c * m.mu + d, c * m.sigma, m.weights)
            assert wdol(mapped, abs_tol=1e-9) == pytest.approx(base, abs=2e-9)


class TestBcd:
    def test_equal_locations_is_zero(self):
        m = MixtureModel(Family.NORMAL, np.array([1.0, 1.0]),
                         np.array([0.5, 2.0]), np.array([0.5, 0.5]))
        assert bcd(m) == pytest.approx(0.0, abs=1e-15)

    def test_cauchy_flagged(self, s1_model):
        assert bcd(s1_model) == UNDEFINED_HEAVY_TAIL

    def test_symmetric_normal_pair(self):
        m = MixtureModel(Family.NORMAL, np.array([-1.0, 1.0]),
                         np.array([1.0, 1.0]), np.array([0.5, 0.5]))
        # law of total variance by hand: between 1, within 1
        assert bcd(m) == pytest.approx(0.5)

    def test_in_unit_interval_when_defined(self):
        rng = np.random.default_rng(72)
        for _ in range(200):
            m = random_model(rng, family=Family.LOGISTIC)
            v = bcd(m)
            assert 0.0 <= v <= 1.0


class TestRbcd:
    def test_single_component_is_zero(self):
        for fam in Family:
            m = MixtureModel(fam, np.array([3.0]), np.array([2.0]), np.array([1.0]))
            value, _ = rbcd(m, mc_n=1000, seed=1)
            assert value == 0.0

    def test_normal_against_folded_oracle(self):
        m = MixtureModel(Family.NORMAL, np.array([-2.0, 1.0]),
                         np.array([1.0, 0.5]), np.array([0.5, 0.5]))
        med = m.median()
        numer = float(np.dot(m.weights, np.abs(m.mu - med)))

        def folded_mean(mu, sigma, c):
            a = (c - mu) / sigma
            phi = math.exp(-0.5 * a * a) / math.sqrt(2 * math.pi)
            cdf = 0.5 * (1.0 + math.erf(a / math.sqrt(2.0)))
            return sigma * (2 * phi + a * (2 * cdf - 1.0))

        denom = sum(w * folded_mean(mu, sig, med)
                    for w, mu, sig in zip(m.weights, m.mu, m.sigma))
        mc_n = 200_000
        value, flag = rbcd(m, mc_n=mc_n, seed=2)
        assert flag is None
        draws = np.abs(m.sample(mc_n, 2) - med)
        se = numer / denom**2 * draws.std(ddof=1) / math.sqrt(mc_n)
        assert value == pytest.approx(numer / denom, abs=3 * se)

    def test_cauchy_flagged_finite_sample(self, s1_model):
        value, flag = rbcd(s1_model, mc_n=10_000, seed=3)
        assert flag == DIVERGENT_DENOMINATOR
        assert math.isfinite(value) and value > 0

    def test_small_mc_rejected(self, s1_model):
        with pytest.raises(DataError):
            rbcd(s1_model, mc_n=10, seed=0)


class TestReport:
    def test_cauchy_report_fields(self, s1_model):
        rep = overlap_report(s1_model, mc_n=2000, seed=0)
        out = rep.to_dict()
        assert out["bcd"] == UNDEFINED_HEAVY_TAIL
        assert out["rbcd_flag"] == DIVERGENT_DENOMINATOR
        assert 0.0 <= out["wdol"] <= 1.0 + 1e-9
        assert "dol" not in out  # pairwise measure needs m == 2

    def test_pairwise_dol_present(self):
        m = cauchy_model([-1.0, 1.0], [1.0, 1.0], [0.5, 0.5])
        rep = overlap_report(m, mc_n=2000, seed=0)
        assert rep.dol is not None and 0.0 < rep.dol < 1.0
