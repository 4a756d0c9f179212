"""Component overlap and dispersion measures with heavy-tail-safe quadrature.

Real-line integrals are computed after the substitution x = tan(theta),
which maps the line onto (-pi/2, pi/2) and turns a Cauchy-tailed integrand
into a bounded one; adaptive Simpson then refines where the integrand has
structure (including the kinks of pointwise minima).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Family, MixtureModel
from .errors import DataError, IntegrationError

__all__ = [
    "integrate_real_line",
    "dol",
    "wdol",
    "bcd",
    "rbcd",
    "OverlapReport",
    "overlap_report",
    "UNDEFINED_HEAVY_TAIL",
    "DIVERGENT_DENOMINATOR",
]

UNDEFINED_HEAVY_TAIL = "undefined-heavy-tail"
DIVERGENT_DENOMINATOR = "divergent-denominator"

_MAX_DEPTH = 60
# ~100x the heaviest well-posed integrand seen at tight tolerances; only an
# unattainable tolerance can burn through this.
_MAX_EVALS = 100_000


def integrate_real_line(f, abs_tol: float = 1e-8) -> tuple[float, float]:
    """Integrate a nonnegative integrable f over the whole real line.

    Returns (value, error_bound). Raises IntegrationError (carrying the
    partial estimate) when refinement hits the depth limit or the overall
    evaluation budget; the budget guard keeps unattainable tolerances from
    exploding the refinement tree instead of failing.
    """
    if abs_tol <= 0:
        raise DataError("abs_tol must be positive")

    evals = [0]

    def h(theta: float) -> float:
        evals[0] += 1
        t = math.tan(theta)
        return f(t) * (1.0 + t * t)

    def refine(a, fa, b, fb, tol, depth, m, fm, whole):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = h(lm), h(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol:
            return left + right + err, abs(err)
        if depth >= _MAX_DEPTH or evals[0] > _MAX_EVALS:
            raise IntegrationError(
                "adaptive quadrature did not converge "
                f"(depth {depth}, {evals[0]} evaluations)",
                partial=left + right, err_estimate=abs(err))
        lv, le = refine(a, fa, m, fm, tol / 2.0, depth + 1, lm, flm, left)
        rv, re = refine(m, fm, b, fb, tol / 2.0, depth + 1, rm, frm, right)
        return lv + rv, le + re

    a, b = -math.pi / 2.0, math.pi / 2.0
    # Seed the recursion on a few panels so narrow spikes cannot hide
    # behind a symmetric 5-point probe of the full interval.
    knots = np.linspace(a, b, 17)
    vals = [h(t) for t in knots]
    total = 0.0
    err = 0.0
    for i in range(0, 16, 2):
        x0, x1, x2 = knots[i], knots[i + 1], knots[i + 2]
        f0, f1, f2 = vals[i], vals[i + 1], vals[i + 2]
        whole = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)
        v, e = refine(x0, f0, x2, f2, abs_tol / 8.0, 0, x1, f1, whole)
        total += v
        err += e
    return total, err


def dol(g1, g2, abs_tol: float = 1e-8) -> float:
    """Degree of overlapping of two densities: the integral of min(g1, g2).

    Exactly in [0, 1]; quadrature overshoot beyond the bounds is clipped.
    """
    value, _ = integrate_real_line(lambda x: min(g1(x), g2(x)), abs_tol)
    return min(max(value, 0.0), 1.0)


def wdol(model: MixtureModel, abs_tol: float = 1e-8) -> float:
    """Weighted degree of overlapping of a mixture.

    The integral of the pointwise minimum of the weighted component
    densities, normalized by the smallest weight; 0 means disjoint
    components, 1 identical ones. All weights must be strictly positive.
    """
    value, _ = _wdol_with_err(model, abs_tol)
    return value


def _wdol_with_err(model: MixtureModel, abs_tol: float) -> tuple[float, float]:
    if np.any(model.weights <= 0):
        raise DataError("wdol requires strictly positive weights")
    w = model.weights
    mu, sigma = model.mu, model.sigma
    fam = model.family

    def integrand(x: float) -> float:
        z = (x - mu) / sigma
        return float(np.min(w * fam.pdf(z) / sigma))

    value, err = integrate_real_line(integrand, abs_tol)
    # The ratio is exactly in [0, 1]; the division by a small weight can
    # amplify quadrature error past the bound, so clip the overshoot.
    return min(max(value / float(w.min()), 0.0), 1.0), err


def bcd(model: MixtureModel) -> float | str:
    """Between-component dispersion: Var(E[X|Z]) / Var(X).

    Defined only for families with a finite second moment; Cauchy mixtures
    get the "undefined-heavy-tail" flag instead of a number.
    """
    v_std = model.family.std_variance
    if v_std is None:
        return UNDEFINED_HEAVY_TAIL
    w, mu, sigma = model.weights, model.mu, model.sigma
    mean = float(np.dot(w, mu))
    between = float(np.dot(w, mu**2)) - mean**2
    within = float(np.dot(w, v_std * sigma**2))
    total = between + within
    if total == 0.0:
        return 0.0
    return between / total


def rbcd(model: MixtureModel, mc_n: int = 100_000,
         seed: int = 0) -> tuple[float, str | None]:
    """Robust between-component dispersion and an optional divergence flag.

    Numerator: mean absolute deviation of the component medians (the
    locations, by symmetry) around the mixture median. Denominator: Monte
    Carlo estimate of E|X - Med(X)| with ``mc_n`` seeded draws. For Cauchy
    components the population denominator diverges, so the returned value
    is a finite-sample quantity and the flag is set.
    """
    if mc_n < 1000:
        raise DataError("mc_n must be at least 1000")
    med = model.median()
    numer = float(np.dot(model.weights, np.abs(model.mu - med)))
    flag = DIVERGENT_DENOMINATOR if model.family is Family.CAUCHY else None
    if numer == 0.0:
        return 0.0, flag
    draws = model.sample(mc_n, seed)
    denom = float(np.mean(np.abs(draws - med)))
    return numer / denom, flag


@dataclass(frozen=True)
class OverlapReport:
    """Bundle of overlap/dispersion diagnostics for one mixture."""

    wdol: float
    bcd: float | str
    rbcd: float
    rbcd_flag: str | None
    quadrature_abs_err: float
    dol: float | None = None  # pairwise measure, only defined for m = 2

    def to_dict(self) -> dict:
        out = {
            "wdol": self.wdol,
            "bcd": self.bcd,
            "rbcd": self.rbcd,
            "rbcd_flag": self.rbcd_flag,
            "quadrature_abs_err": self.quadrature_abs_err,
        }
        if self.dol is not None:
            out["dol"] = self.dol
        return out


def overlap_report(model: MixtureModel, abs_tol: float = 1e-8,
                   mc_n: int = 100_000, seed: int = 0) -> OverlapReport:
    """Compute every applicable measure for one model."""
    wdol_value, err = _wdol_with_err(model, abs_tol)
    rbcd_value, rbcd_flag = rbcd(model, mc_n, seed)
    pair = None
    if model.m == 2:
        g1 = _component_pdf(model, 0)
        g2 = _component_pdf(model, 1)
        pair = dol(g1, g2, abs_tol)
    return OverlapReport(wdol=wdol_value, bcd=bcd(model), rbcd=rbcd_value,
                         rbcd_flag=rbcd_flag, quadrature_abs_err=err, dol=pair)


def _component_pdf(model: MixtureModel, k: int):
    mu, sigma, fam = float(model.mu[k]), float(model.sigma[k]), model.family
    return lambda x: fam.pdf((x - mu) / sigma) / sigma
