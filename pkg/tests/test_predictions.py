"""Leading-order predictions and the binormal-deformation calculus."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import frenet_from_derivatives, trefoil_analytic
from vortextubes.chart import TubeChart
from vortextubes.curves import arclength_reparam, check_admissible, circle
from vortextubes.errors import AdmissibilityLost
from vortextubes.predictions import (binormal_deform, central_difference, genericity_derivatives,
                                     herman_factor, predict, predict_with_profile)

# int kappa^2 tau ds over the trefoil and kappa at its start point, frozen
# from adaptive quadrature of the closed-form Frenet data (see below)
TREFOIL_K2T = -4.782522627960621
TREFOIL_KAPPA0 = 7 / 15
TREFOIL_TOTAL_TORSION = -15.593362799471352


def test_frozen_constants_against_quadrature():
    def integrand(t):
        d = trefoil_analytic(t)
        k, tau = frenet_from_derivatives(d[1], d[2], d[3])
        return k ** 2 * tau * np.linalg.norm(d[1])

    val, _ = quad(integrand, 0, 2 * np.pi, limit=400, epsabs=1e-13)
    assert val == pytest.approx(TREFOIL_K2T, abs=1e-11)
    d = trefoil_analytic(0.0)
    assert frenet_from_derivatives(d[1], d[2], d[3])[0] == pytest.approx(TREFOIL_KAPPA0, rel=1e-14)


def test_circle_predictions(unit_circle):
    p = predict(unit_circle, 0.1)
    assert abs(p.omega) < 1e-13 and abs(p.normal_torsion) < 1e-13
    assert p.theta_sin == pytest.approx(-0.1 / 4)


def test_trefoil_golden(tref):
    eps = 0.05
    p = predict(tref, eps)
    assert p.omega == pytest.approx(TREFOIL_TOTAL_TORSION, abs=1e-10)
    assert p.normal_torsion == pytest.approx(-5 * np.pi * eps ** 2 / 8 * TREFOIL_K2T, abs=1e-11)
    assert p.theta_sin == pytest.approx(-eps * TREFOIL_KAPPA0 / 4, abs=1e-12)
    q = predict(tref, eps, n=2 * tref.sample_count)
    assert abs(q.omega - p.omega) < 1e-10 and abs(q.normal_torsion - p.normal_torsion) < 1e-10


def test_herman_factor():
    assert herman_factor(0.1) == pytest.approx(-5 * np.pi * 0.01 / 8)


def test_constant_curvature_factorization(unit_circle):
    """With kappa = c constant, N = -(5 pi eps^2 c^2 / 8) int tau."""
    for R in (0.5, 2.0):
        p = predict(circle(R), 0.05)
        assert p.normal_torsion == pytest.approx(herman_factor(0.05) / R ** 2 * p.omega, abs=1e-14)


def test_reversal_and_mirror(tref):
    """Curvature and torsion do not depend on the direction of travel, so the
    predictions are invariant under reversal; a mirror image flips the sign
    of tau and hence of both predictions."""
    p = predict(tref, 0.05)
    q = predict(arclength_reparam(tref.reversed()), 0.05)
    assert abs(p.omega - q.omega) < 1e-10
    assert abs(p.normal_torsion - q.normal_torsion) < 1e-10
    m = predict(tref.transformed(np.diag([1.0, 1.0, -1.0])), 0.05)
    assert abs(p.omega + m.omega) < 1e-10
    assert abs(p.normal_torsion + m.normal_torsion) < 1e-10


@settings(deadline=None, max_examples=10)
@given(c=st.floats(0.5, 3.0), angle=st.floats(0, 2 * np.pi))
def test_similarity_scaling(tref, c, angle):
    """Scaling the curve by c keeps int tau and divides int kappa^2 tau by c^2."""
    R = np.array([[np.cos(angle), -np.sin(angle), 0], [np.sin(angle), np.cos(angle), 0], [0, 0, 1]])
    scaled = tref.transformed(c * R, (1.0, 2.0, 3.0))
    p, q = predict(tref, 0.05), predict(scaled, 0.05)
    assert q.omega == pytest.approx(p.omega, abs=1e-9)
    assert q.kappa2_tau == pytest.approx(p.kappa2_tau / c ** 2, rel=1e-9)


# -- binormal deformation ------------------------------------------------------

def test_zero_deformation_is_identity(tref):
    assert binormal_deform(tref, np.sin, 0.0) is tref


def test_circle_length_changes_quadratically(unit_circle):
    F = lambda s: np.cos(2 * s)  # noqa: E731
    dl = [abs(binormal_deform(unit_circle, F, d).length - unit_circle.length) for d in (4e-2, 2e-2, 1e-2)]
    orders = np.log2(np.array(dl[:-1]) / np.array(dl[1:]))
    assert np.all(orders > 1.9)


def test_trefoil_deformation_admissible(tref):
    L = tref.length
    out = binormal_deform(tref, lambda s: np.sin(2 * np.pi * s / L), 1e-3)
    assert check_admissible(out, 0.05).ok
    assert out.meta["deformation"]["delta"] == 1e-3
    assert abs(out.length - L) < 1e-5


def test_deformation_moves_along_binormal(tref):
    L = tref.length
    F = lambda s: np.sin(2 * np.pi * s / L)  # noqa: E731
    d = 1e-4
    out = binormal_deform(tref, F, d)
    # foot points on the original core: the displacement is d F e2 up to O(d^2)
    ch = TubeChart(tref, 1.0, check=False)
    a, y = ch.from_cartesian(out(out.alpha[::10]))
    assert np.abs(y[:, 0]).max() < 10 * d ** 2
    assert np.abs(y[:, 1] - d * F(a)).max() < 10 * d ** 2


def test_deformation_losing_admissibility(unit_circle):
    with pytest.raises(AdmissibilityLost):
        binormal_deform(unit_circle, lambda s: np.sin(40 * s), 5.0)


# -- genericity derivatives --------------------------------------------------------------

def test_constant_profile_gives_zero_rotation_derivative(tref):
    g = genericity_derivatives(tref, lambda s: np.ones_like(s), 0.05)
    assert abs(g.d_omega) < 1e-10


def test_circle_derivatives_vanish(unit_circle):
    g = genericity_derivatives(unit_circle, np.sin, 0.05)
    assert abs(g.d_omega) < 1e-12 and abs(g.d_normal_torsion) < 1e-12


def test_curvature_profile_is_a_perfect_derivative(tref):
    g = genericity_derivatives(tref, lambda s: tref.kappa_series(s), 0.05)
    assert abs(g.d_omega) < 1e-10


def test_derivatives_match_central_differences(tref):
    L = tref.length
    F = lambda s: np.sin(2 * np.pi * s / L)  # noqa: E731
    g = genericity_derivatives(tref, F, 0.05)
    fd = central_difference(tref, F, 0.05, delta=1e-4)
    assert fd.d_omega == pytest.approx(g.d_omega, rel=1e-2, abs=1e-6)
    assert fd.d_normal_torsion == pytest.approx(g.d_normal_torsion, rel=1e-2, abs=1e-8)
    p = predict_with_profile(tref, 0.05, F)
    assert p.d_omega == g.d_omega and p.d_normal_torsion == g.d_normal_torsion
