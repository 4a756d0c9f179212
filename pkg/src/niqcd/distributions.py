"""Location-scale families and the finite mixtures built from them.

A family is described by its standard density g (unimodal at 0, integrating
to 1) and standard CDF G (strictly increasing, G(-inf)=0, G(+inf)=1). A
mixture with m components has density

    f(x) = sum_k  w_k * g((x - mu_k) / sigma_k) / sigma_k

with nonnegative weights summing to one and locations sorted ascending for
identifiability.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DataError

__all__ = [
    "Family",
    "MixtureModel",
    "std_pdf",
    "std_cdf",
    "std_quantile",
]

# Quantile arguments are clamped to this band before inversion so that
# heavy-tailed inverses stay inside the representable float range.
_P_CLAMP = 1e-15

_LOG_PI = math.log(math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Family(enum.Enum):
    """Supported symmetric location-scale families."""

    CAUCHY = "cauchy"
    NORMAL = "normal"
    LOGISTIC = "logistic"

    @classmethod
    def parse(cls, name: str) -> "Family":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DataError(f"unknown family {name!r}; expected one of "
                            f"{[f.value for f in cls]}") from None

    def pdf(self, z):
        """Standard density g(z); accepts scalars or arrays."""
        z = np.asarray(z, dtype=float)
        if self is Family.CAUCHY:
            out = 1.0 / (math.pi * (1.0 + z * z))
        elif self is Family.NORMAL:
            out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        else:
            a = np.exp(-np.abs(z))
            out = a / (1.0 + a) ** 2
        return out if out.ndim else float(out)

    def log_pdf(self, z):
        """log g(z), stable in the far tails."""
        z = np.asarray(z, dtype=float)
        if self is Family.CAUCHY:
            # log1p(z^2) overflows past |z| ~ 1e154; switch to 2*log|z| there.
            big = np.abs(z) > 1e150
            safe = np.where(big, 0.0, z)
            out = np.where(
                big,
                -_LOG_PI - 2.0 * np.log(np.abs(np.where(big, z, 1.0))),
                -_LOG_PI - np.log1p(safe * safe),
            )
        elif self is Family.NORMAL:
            with np.errstate(over="ignore"):  # z*z -> inf gives the right -inf
                out = -0.5 * z * z - _LOG_SQRT_2PI
        else:
            out = -np.abs(z) - 2.0 * np.log1p(np.exp(-np.abs(z)))
        return out if out.ndim else float(out)

    def cdf(self, z):
        """Standard CDF G(z); accepts scalars or arrays, tolerates +-inf."""
        z = np.asarray(z, dtype=float)
        if self is Family.CAUCHY:
            out = 0.5 + np.arctan(z) / math.pi
        elif self is Family.NORMAL:
            out = ndtr(z)
        else:
            # exp(-z) saturates to inf for very negative z; 1/(1+inf) is the
            # right limit, so only the overflow warning needs silencing.
            with np.errstate(over="ignore"):
                out = 1.0 / (1.0 + np.exp(-z))
        return out if out.ndim else float(out)

    def quantile(self, p):
        """Inverse CDF; p is clamped away from {0,1} to stay finite."""
        p = np.clip(np.asarray(p, dtype=float), _P_CLAMP, 1.0 - _P_CLAMP)
        if self is Family.CAUCHY:
            out = np.tan(math.pi * (p - 0.5))
        elif self is Family.NORMAL:
            out = ndtri(p)
        else:
            out = np.log(p / (1.0 - p))
        return out if out.ndim else float(out)

    @property
    def std_variance(self) -> float | None:
        """Variance of the standard member; None when it does not exist."""
        if self is Family.CAUCHY:
            return None
        if self is Family.NORMAL:
            return 1.0
        return math.pi**2 / 3.0


def std_pdf(family: Family, z: float) -> float:
    """Standard density g(z) of the family; rejects non-finite z."""
    if not math.isfinite(z):
        raise DataError(f"std_pdf needs finite z, got {z!r}")
    return float(family.pdf(z))


def std_cdf(family: Family, z: float) -> float:
    """Standard CDF G(z); z may be +-inf."""
    if math.isnan(z):
        raise DataError("std_cdf got NaN")
    if math.isinf(z):
        return 0.0 if z < 0 else 1.0
    return float(family.cdf(z))


def std_quantile(family: Family, p: float) -> float:
    """Inverse of std_cdf with the tail clamp documented on Family.quantile."""
    return float(family.quantile(p))


@dataclass(frozen=True)
class MixtureModel:
    """Immutable m-component location-scale mixture.

    Parameters
    ----------
    family : Family
        The component family.
    mu : array_like
        Component locations, non-decreasing.
    sigma : array_like
        Component scales, strictly positive.
    weights : array_like
        Mixing weights, nonnegative and summing to 1 (within 1e-12).
    """

    family: Family
    mu: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if not (mu.ndim == sigma.ndim == weights.ndim == 1):
            raise DataError("mu, sigma, weights must be 1-D")
        if not (len(mu) == len(sigma) == len(weights)) or len(mu) == 0:
            raise DataError("mu, sigma, weights must share a positive length")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(sigma)):
            raise DataError("non-finite mixture parameters")
        if np.any(np.diff(mu) < 0):
            raise DataError("locations must be non-decreasing")
        if np.any(sigma <= 0):
            raise DataError("scales must be strictly positive")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise DataError("weights must be nonnegative and sum to 1")
        for name, arr in (("mu", mu), ("sigma", sigma), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "m", len(mu))

    # -- density / distribution -------------------------------------------

    def pdf(self, x):
        """Mixture density at x (scalar or array)."""
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.mu) / self.sigma
        out = np.sum(self.weights * self.family.pdf(z) / self.sigma, axis=-1)
        return out if out.ndim else float(out)

    def log_pdf(self, x):
        """log of the mixture density, computed by log-sum-exp over components."""
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.mu) / self.sigma
        with np.errstate(divide="ignore"):
            terms = (np.log(self.weights) - np.log(self.sigma)
                     + self.family.log_pdf(z))
        hi = np.max(terms, axis=-1, keepdims=True)
        out = (np.log(np.sum(np.exp(terms - hi), axis=-1))
               + np.squeeze(hi, axis=-1))
        return out if out.ndim else float(out)

    def cdf(self, x):
        """Mixture CDF at x (scalar or array)."""
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.mu) / self.sigma
        out = np.sum(self.weights * self.family.cdf(z), axis=-1)
        return out if out.ndim else float(out)

    def median(self) -> float:
        """Unique root of cdf(x) = 1/2, bisection bracketed then Newton-polished.

        The initial bracket spans every component's 0.1%..99.9% band and is
        widened geometrically in the (unreachable for valid models) case the
        sign change is missed.
        """
        spread = 10.0 * float(np.max(self.sigma)) * math.tan(math.pi * 0.499)
        lo = float(np.min(self.mu)) - spread
        hi = float(np.max(self.mu)) + spread
        f = lambda x: self.cdf(x) - 0.5
        flo, fhi = f(lo), f(hi)
        while flo > 0 or fhi < 0:
            width = hi - lo
            lo, hi = lo - width, hi + width
            flo, fhi = f(lo), f(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0 or hi - lo < 1e-13 * max(1.0, abs(mid)):
                break
            if fm < 0:
                lo = mid
            else:
                hi = mid
        x = 0.5 * (lo + hi)
        for _ in range(50):
            fx = f(x)
            if abs(fx) < 1e-14:
                break
            d = self.pdf(x)
            if d <= 0:
                break
            step = fx / d
            x_new = x - step
            if not lo <= x_new <= hi:
                x_new = 0.5 * (lo + hi)
            if f(x_new) < 0:
                lo = x_new
            else:
                hi = x_new
            if abs(x_new - x) < 1e-12 * max(1.0, abs(x)):
                x = x_new
                break
            x = x_new
        return float(x)

    def sample(self, n: int, seed) -> np.ndarray:
        """Draw n variates: component labels first, then inverse-CDF transforms.

        Deterministic for a fixed seed (an int or anything else
        ``numpy.random.default_rng`` accepts).
        """
        if n < 1:
            raise DataError("sample size must be >= 1")
        rng = np.random.default_rng(seed)
        labels = rng.choice(self.m, size=n, p=self.weights)
        u = rng.uniform(size=n)
        return self.mu[labels] + self.sigma[labels] * self.family.quantile(u)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "m": self.m,
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "lambda": self.weights.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "MixtureModel":
        try:
            family = Family.parse(obj["family"])
            mu = obj["mu"]
            sigma = obj["sigma"]
            weights = obj["lambda"]
        except KeyError as exc:
            raise DataError(f"model object missing field {exc}") from None
        model = cls(family, np.asarray(mu, float), np.asarray(sigma, float),
                    np.asarray(weights, float))
        if "m" in obj and int(obj["m"]) != model.m:
            raise DataError("declared m does not match parameter length")
        return model

    @classmethod
    def from_json(cls, text: str) -> "MixtureModel":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid model JSON: {exc}") from None
        return cls.from_dict(obj)
