import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vortextubes.chart import TubeChart
from vortextubes.curves import arclength_reparam, circle, trefoil

settings.register_profile("repo", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def trefoil_raw():
    return trefoil()


@pytest.fixture(scope="session")
def tref(trefoil_raw):
    return arclength_reparam(trefoil_raw)


@pytest.fixture(scope="session")
def unit_circle():
    return circle(1.0)


@pytest.fixture(scope="session")
def tref_chart(tref):
    return TubeChart(tref, 0.1)


def trefoil_analytic(t):
    """Position and first three derivatives of the trefoil parametrization
    (independent of the Fourier machinery)."""
    t = np.asarray(t, dtype=float)
    c2, s2, c3, s3 = np.cos(2 * t), np.sin(2 * t), np.cos(3 * t), np.sin(3 * t)
    a, a1, a2, a3 = 2 + c3, -3 * s3, -9 * c3, 27 * s3
    # x = a c2, y = a s2, z = s3
    x = [a * c2, a1 * c2 - 2 * a * s2, a2 * c2 - 4 * a1 * s2 - 4 * a * c2,
         a3 * c2 - 6 * a2 * s2 - 12 * a1 * c2 + 8 * a * s2]
    y = [a * s2, a1 * s2 + 2 * a * c2, a2 * s2 + 4 * a1 * c2 - 4 * a * s2,
         a3 * s2 + 6 * a2 * c2 - 12 * a1 * s2 - 8 * a * c2]
    z = [s3, 3 * c3, -9 * s3, -27 * c3]
    return [np.stack([x[k], y[k], z[k]], -1) for k in range(4)]


def frenet_from_derivatives(d1, d2, d3):
    c = np.cross(d1, d2)
    nd1 = np.linalg.norm(d1, axis=-1)
    nc = np.linalg.norm(c, axis=-1)
    return nc / nd1 ** 3, np.sum(c * d3, -1) / nc ** 2
