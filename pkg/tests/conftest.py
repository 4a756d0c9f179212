import numpy as np
import pytest

from niqcd.distributions import Family, MixtureModel


def cauchy_model(mu, sigma, weights) -> MixtureModel:
    return MixtureModel(Family.CAUCHY, np.asarray(mu, float),
                        np.asarray(sigma, float), np.asarray(weights, float))


def random_model(rng, family=None, max_m=4) -> MixtureModel:
    """A random valid mixture with moderate parameters."""
    if family is None:
        family = rng.choice(list(Family))
    m = int(rng.integers(1, max_m + 1))
    mu = np.sort(rng.normal(0.0, 5.0, size=m))
    sigma = np.exp(rng.uniform(-1.0, 1.0, size=m))
    w = rng.dirichlet(np.ones(m))
    w = w / w.sum()
    return MixtureModel(family, mu, sigma, w)


@pytest.fixture
def s1_model():
    return cauchy_model([-5.0, 0.0, 5.0], [0.1, 0.1, 0.1], [0.33, 0.33, 0.34])
