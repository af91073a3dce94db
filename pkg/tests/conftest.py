import math

import numpy as np
import mpmath
import pytest
from hypothesis import settings

from semihelix import presets
from semihelix.construct import SemiHelixSpec, build_product_surface
from semihelix.euclid import AngleWindow

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

E3 = np.array([0.0, 0.0, 1.0])


@pytest.fixture(scope="session")
def fixture_spec():
    """Unit circle base in R^2, n = 3, r = 1, eps = pi/3, outward normal."""
    return SemiHelixSpec(presets.circle(1.0), 1.0, AngleWindow(0.0, math.pi / 3))


@pytest.fixture(scope="session")
def fixture_surface(fixture_spec):
    return build_product_surface(fixture_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


def literal_chord(r, theta, eta, d, digits=50):
    """
    r*sqrt(2(1 - cos theta))*T_phi evaluated in high precision and rounded to
    float. In double precision 1 - cos theta cancels catastrophically near 0,
    so the plain float formula is not a usable 1e-12 oracle there.
    """
    with mpmath.workdps(digits):
        th = mpmath.mpf(theta)
        scale = mpmath.mpf(r) * mpmath.sqrt(2 * (1 - mpmath.cos(th)))
        phi = (mpmath.pi - th) / 2
        c, s = mpmath.cos(phi), mpmath.sin(phi)
        return np.array([float(scale * (c * mpmath.mpf(e) + s * mpmath.mpf(g))) for e, g in zip(eta, d)])
