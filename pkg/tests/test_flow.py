"""Flow of X = h / h_alpha: trajectories, Poincaré and boundary maps,
rotation numbers, conjugacy, invariant measure, normal torsion, monodromy."""

import numpy as np
import pytest
from scipy.optimize import brentq

from vortextubes._spectral import PeriodicSeries
from vortextubes.chart import TubeChart
from vortextubes.curves import arclength_reparam, make_fourier_curve
from vortextubes.errors import LeftDomain, NonPositiveDenominator, SmallDivisorBreakdown
from vortextubes.flow import (CircleMap, ModelChart, boundary_map, conjugacy, continued_fraction,
                              diophantine_quality, field_X, integrate, measure_density,
                              measure_preservation_check, monodromy_core, normal_torsion, poincare_map,
                              rotation_number, trajectory_asymptotic)
from vortextubes.grid import TubeGrid, TubeScalarField
from vortextubes.harmonic import HarmonicField, solve_harmonic


@pytest.fixture(scope="module")
def flow_tref():
    from vortextubes.curves import trefoil
    ch = TubeChart(arclength_reparam(trefoil()), 0.1)
    return field_X(ch, solve_harmonic(ch))


@pytest.fixture(scope="module")
def flow_circle():
    from vortextubes.curves import circle
    return field_X(TubeChart(circle(), 0.1), None)


@pytest.fixture
def rigid():
    return field_X(ModelChart(0.0, 0.3, 5.0, 0.1), None)


# -- the field ---------------------------------------------------------------------

def test_circle_field_is_trivial(flow_circle):
    f1, f2 = flow_circle.rhs(0.7, np.array([0.3, 1.0]), np.array([0.0, 4.0]))
    assert np.all(f1 == 0) and np.abs(f2).max() < 1e-13


def test_constant_torsion_model(rigid):
    f1, f2 = rigid.rhs(1.0, np.array([0.5, 0.9]), np.array([0.1, 3.0]))
    assert np.all(f1 == 0)
    np.testing.assert_allclose(f2, 0.3)


def test_boundary_is_invariant(flow_tref):
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    for a in np.linspace(0, flow_tref.length, 7):
        f1, _ = flow_tref.rhs(a, np.ones_like(th), th)
        assert np.abs(f1).max() <= 1e-10


def test_jacobian_matches_finite_differences(flow_tref):
    a, r, t, d = 2.0, np.array([0.6]), np.array([1.3]), 1e-6
    _, _, J = flow_tref.rhs(a, r, t, jacobian=True)
    fr = (np.array(flow_tref.rhs(a, r + d, t)) - np.array(flow_tref.rhs(a, r - d, t)))[:, 0] / (2 * d)
    ft = (np.array(flow_tref.rhs(a, r, t + d)) - np.array(flow_tref.rhs(a, r, t - d)))[:, 0] / (2 * d)
    np.testing.assert_allclose(J[:, 0, 0], fr, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(J[:, 1, 0], ft, rtol=1e-6, atol=1e-8)


def test_cartesian_form_near_axis(flow_tref, rigid):
    y = np.array([[1e-4, -2e-4], [0.0, 0.0]])
    assert np.all(np.isfinite(flow_tref.cartesian(1.0, y)))
    np.testing.assert_allclose(rigid.cartesian(0.0, [[0.5, 0.0]]), [[0.0, 0.15]])


def test_nonpositive_denominator_detected(tref_chart):
    g = TubeGrid(tref_chart, 32, 8, 16)
    bad = TubeScalarField.from_function(g, lambda a, r, t: -10 * g.length * np.sin(2 * np.pi * a / g.length)
                                        + 0 * r * t)
    with pytest.raises(NonPositiveDenominator):
        field_X(tref_chart, HarmonicField(g, bad))


# -- integration ---------------------------------------------------------------------

def test_circle_trajectories_are_fixed(flow_circle):
    st = integrate(flow_circle, [0.4, 1.0], [0.3, 2.0], flow_circle.length)
    np.testing.assert_allclose(st.r, [0.4, 1.0], atol=1e-14)
    np.testing.assert_allclose(st.theta, [0.3, 2.0], atol=1e-14)


def test_reversibility(flow_tref):
    """Forward then backward integration returns to the start point.

    The tolerance bounds the local error per step, so the round-trip error
    grows with the number of steps: within ``10 tol`` over a short span,
    within ``tol`` times the step count over a full period.
    """
    tol = 1e-10
    st = integrate(flow_tref, 0.7, 0.4, 1.0, tol=tol)
    back = integrate(flow_tref, st.r, st.theta, 0.0, tol=tol, s0=1.0)
    assert abs(back.r[0] - 0.7) <= 10 * tol and abs(back.theta[0] - 0.4) <= 10 * tol
    L = flow_tref.length
    st = integrate(flow_tref, 0.7, 0.4, L, tol=tol)
    back = integrate(flow_tref, st.r, st.theta, 0.0, tol=tol, s0=L)
    steps = len(st.solution.t) + len(back.solution.t)
    assert abs(back.r[0] - 0.7) <= steps * tol and abs(back.theta[0] - 0.4) <= steps * tol


def test_boundary_trajectory_stays_on_boundary(flow_tref):
    tol = 1e-10
    st = integrate(flow_tref, 1.0, 0.5, 3 * flow_tref.length, tol=tol, dense=True)
    assert np.abs(st.solution.y[0] - 1.0).max() <= 10 * tol


def test_domain_checks(flow_tref):
    with pytest.raises(LeftDomain):
        integrate(flow_tref, 1.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        integrate(flow_tref, 0.01, 0.0, 1.0)


def test_trajectory_close_to_expansion(flow_tref):
    """At eps = 0.1 the second-order expansion tracks the numerical trajectory to O(eps^3)."""
    L = flow_tref.length
    s = np.linspace(0, L, 41)
    st = integrate(flow_tref, 0.8, 0.7, L, tol=1e-11, t_eval=s)
    r_pred, th_pred = trajectory_asymptotic(flow_tref.chart, 0.1, s, 0.8, 0.7)
    assert np.abs(st.solution.y[1] - th_pred).max() < 20 * 0.1 ** 3
    assert np.abs(st.solution.y[0] - r_pred).max() < 20 * 0.1 ** 2


# -- Poincaré and boundary maps ----------------------------------------------------------

def test_poincare_identity_for_circle(flow_circle):
    r, th = poincare_map(flow_circle, [0.5, 0.9], [1.0, 5.0])
    np.testing.assert_allclose(r, [0.5, 0.9], atol=1e-14)
    np.testing.assert_allclose(th, [1.0, 5.0], atol=1e-14)


def test_poincare_rigid_rotation(rigid):
    r, th = poincare_map(rigid, 0.5, 1.0)
    assert th[0] == pytest.approx(1.0 + 0.3 * 5.0, abs=1e-10)
    assert boundary_map(rigid, 16).d.a0 == pytest.approx(1.5, abs=1e-10)


def test_boundary_advance_close_to_total_torsion(flow_tref):
    cm = boundary_map(flow_tref, 32)
    T = flow_tref.chart.curve.tau_series.integral()
    adv = cm(np.linspace(0, 2 * np.pi, 9)) - np.linspace(0, 2 * np.pi, 9)
    # theta advance = int tau + O(eps), with the O(eps) term bounded by eps * kappa_max / 2
    kmax = float(flow_tref.chart.curve.curvature(flow_tref.chart.curve.alpha).max())
    assert np.abs(adv - T).max() <= 0.1 * kmax


# -- rotation numbers and conjugacy ------------------------------------------------------

def test_rotation_number_rigid():
    est = rotation_number(CircleMap.rotation(1.234), n_iter=1000)
    assert abs(est.omega - 1.234) <= 1e-12


def test_rotation_number_circle(flow_circle):
    assert abs(rotation_number(flow_circle, n_iter=200).omega) < 1e-12


def test_rotation_number_of_perturbed_rotation_both_estimators():
    # P(t) = t + w + a sin t is conjugate to a rotation for small a and generic w
    cm = CircleMap(PeriodicSeries(2.0, [0.0], [0.05], 2 * np.pi))
    w = rotation_number(cm, 0.0, 4000)
    p = rotation_number(cm, 0.0, 4000, "birkhoff-plain")
    w2 = rotation_number(cm, 1.0, 4000)
    assert abs(w.omega - w2.omega) < 1e-11
    assert abs(w.omega - p.omega) < 1e-3
    assert w.error < p.error


def test_rotation_number_validates_input():
    with pytest.raises(ValueError):
        rotation_number(CircleMap.rotation(1.0), n_iter=10)


def test_conjugacy_of_rotation_is_identity():
    conj = conjugacy(CircleMap.rotation(0.7), 0.7)
    assert np.all(conj.H_hat == 0)


def test_conjugacy_of_perturbed_rotation():
    cm = CircleMap(PeriodicSeries(2.0, [0.0, 0.02], [0.05, 0.0], 2 * np.pi))
    om = rotation_number(cm, 0.0, 10_000).omega
    conj = conjugacy(cm, om, K_modes=64, tol=1e-12)
    v = np.linspace(0, 2 * np.pi, 50)
    np.testing.assert_allclose(cm(conj.Theta(v)), conj.Theta(v + conj.omega), atol=1e-11)
    assert abs(conj.H_hat[0]) < 1e-14


def test_conjugacy_rational_frequency():
    cm = CircleMap(PeriodicSeries(2 * np.pi / 3, [0.0], [0.05], 2 * np.pi))
    with pytest.raises(SmallDivisorBreakdown):
        conjugacy(cm, 2 * np.pi / 3, K_modes=8)


# -- invariant measure and normal torsion -------------------------------------------------

def test_density_examples(flow_circle, flow_tref):
    r, t = np.array([0.3, 1.0]), np.array([0.0, 2.5])
    np.testing.assert_allclose(measure_density(flow_circle, r, t), 1 / (1 - 0.1 * r * np.cos(t)), rtol=1e-14)
    k0 = float(flow_tref.chart.kappa(0.0))
    G = measure_density(flow_tref, r, t)
    assert np.abs(G - 1 - 0.1 * k0 * r * np.cos(t)).max() < 10 * 0.1 ** 2


def test_measure_preserved(flow_circle, rigid, flow_tref):
    r, th = np.array([0.3, 0.6, 0.95]), np.array([0.1, 2.0, 4.0])
    assert measure_preservation_check(flow_circle, r, th).max_defect <= 1e-10
    assert measure_preservation_check(rigid, r, th).max_defect <= 1e-10
    assert measure_preservation_check(flow_tref, r, th, tol=1e-10).max_defect <= 1e-7


def test_normal_torsion_trivial_cases(flow_circle, rigid):
    for f in (flow_circle, rigid):
        cm = boundary_map(f, 16)
        conj = conjugacy(cm, float(cm.d.a0))
        assert abs(normal_torsion(f, conj, 32)) < 1e-12


# -- core monodromy --------------------------------------------------------------------

def test_monodromy_circle(unit_circle):
    m = monodromy_core(unit_circle)
    assert not m.elliptic and abs(m.T) < 1e-12
    np.testing.assert_allclose(m.matrix, np.eye(3), atol=1e-12)


def test_monodromy_trefoil(tref):
    m = monodromy_core(tref)
    T = tref.tau_series.integral()
    assert m.T == pytest.approx(T, abs=1e-8)
    np.testing.assert_allclose(np.sort_complex(m.eigenvalues[1:]), np.sort_complex(np.exp([1j * T, -1j * T])),
                               atol=1e-8)
    assert m.elliptic


def _flattened_trefoil(h):
    cos, sin = np.zeros((4, 3)), np.zeros((4, 3))
    sin[1, 0], sin[2, 0], cos[1, 1], cos[2, 1], sin[3, 2] = 1.0, 2.0, 1.0, -2.0, -h
    return arclength_reparam(make_fourier_curve((cos, sin), 3))


def test_monodromy_quarter_turn():
    """A (2,3) torus-knot family whose total torsion passes through pi/2."""
    h = brentq(lambda h: _flattened_trefoil(h).tau_series.integral() - np.pi / 2, 0.5, 0.7, xtol=1e-13)
    m = monodromy_core(_flattened_trefoil(h))
    assert m.T == pytest.approx(np.pi / 2, abs=1e-9)
    np.testing.assert_allclose(np.sort_complex(m.eigenvalues[1:]), [-1j, 1j], atol=1e-8)
    assert m.elliptic


# -- Diophantine quality ------------------------------------------------------------

def test_diophantine_rational():
    q = diophantine_quality(np.pi, 1.5, 100)
    assert q.C == 0.0 and q.k == 2


def test_diophantine_golden_against_convergents():
    x = (np.sqrt(5) - 1) / 2
    q = diophantine_quality(2 * np.pi * x, 1.5, 10_000)
    # the minimum over k is attained at a convergent (best approximations)
    _, conv = continued_fraction(x, 40)
    oracle = min(k ** 2.5 * abs(x - p / k) for p, k in conv if 1 <= k <= 10_000)
    assert q.C == pytest.approx(oracle, rel=1e-12)
    assert q.C == pytest.approx(1 - x, rel=1e-12)  # golden output: k = 1, p = 1


def test_diophantine_single_denominator():
    w = 2 * np.pi * 0.3
    assert diophantine_quality(w, 2.0, 1).C == pytest.approx(0.3)
    with pytest.raises(ValueError):
        diophantine_quality(w, 1.0)


def test_continued_fraction_of_golden_ratio():
    terms, conv = continued_fraction((np.sqrt(5) - 1) / 2, 12)
    assert terms[0] == 0 and all(a == 1 for a in terms[1:])
    assert [q for _, q in conv[:8]] == [1, 1, 2, 3, 5, 8, 13, 21]


# -- closed-form trajectory expansion -------------------------------------------------

def _orders(curve, s, r0, th0):
    e = 1e-3
    _, tp = trajectory_asymptotic(curve, e, s, r0, th0)
    _, tm = trajectory_asymptotic(curve, -e, s, r0, th0)
    _, t0 = trajectory_asymptotic(curve, 0.0, s, r0, th0)
    return t0, (tp - tm) / (2 * e), (tp + tm - 2 * t0) / (2 * e * e)


def test_expansion_first_order_at_boundary(tref):
    s = np.linspace(0, tref.length, 13)
    th0 = 0.9
    t0, t1, _ = _orders(tref, s, 1.0, th0)
    k = tref.kappa_series
    np.testing.assert_allclose(t1, -0.25 * (k(s) * np.sin(t0) - k(0.0) * np.sin(th0)), atol=1e-9)


def test_expansion_second_order_coefficient(tref):
    L = tref.length
    _, _, t2 = _orders(tref, np.array([L]), 1.0, 0.0)
    T = tref.tau_series.integral()
    a = tref.alpha
    k2t = np.mean(tref.curvature(a) ** 2 * tref.torsion(a)) * L
    k0 = float(tref.kappa_series(0.0))
    # at r0 = 1, theta0 = 0 and s = L only the 7/32 term and the kappa(s)^2 term survive
    assert t2[0] == pytest.approx(7 / 32 * k2t + k0 ** 2 / 192 * np.sin(2 * T), rel=1e-6)


def test_expansion_radial_part_vanishes_at_boundary(tref):
    r, _ = trajectory_asymptotic(tref, 0.1, np.linspace(0, tref.length, 9), 1.0, 0.3)
    np.testing.assert_allclose(r, 1.0)
