"""Harmonic field h = h0 + grad psi, asymptotic correctors and the Beltrami model."""

import numpy as np
import pytest

from vortextubes.chart import TubeChart
from vortextubes.errors import AxisEvaluation, LambdaTooLarge
from vortextubes.grid import TubeGrid, TubeScalarField
from vortextubes.harmonic import (asymptotic_check, gradient_eval, h0_eval, harmonic_eval, model_beltrami,
                                  phi0_eval, phi1_eval, solve_harmonic)


@pytest.fixture(scope="module")
def h_tref():
    from vortextubes.curves import arclength_reparam, trefoil
    return solve_harmonic(TubeChart(arclength_reparam(trefoil()), 0.1))


# -- closed forms -------------------------------------------------------------

def test_h0_circle_boundary(unit_circle):
    va, vr, vt = h0_eval(TubeChart(unit_circle, 0.1), 0.0, 1.0, 0.0)
    assert va == pytest.approx(1 / 0.81, rel=1e-14)
    assert vr == 0.0 and abs(vt) < 1e-13


def test_h0_on_axis(tref_chart):
    a = np.linspace(0, tref_chart.length, 9)
    va, vr, vt = h0_eval(tref_chart, a, 0.0, 0.3)
    np.testing.assert_allclose(va, 1.0)
    np.testing.assert_allclose(vt, tref_chart.tau(a))
    assert np.all(vr == 0.0)


def test_phi_vanish_on_circle(unit_circle):
    ch = TubeChart(unit_circle, 0.1)
    a, r, t = np.linspace(0, ch.length, 5), 0.7, 1.1
    assert np.abs(phi0_eval(ch, a, r, t)).max() < 1e-15
    assert np.abs(phi1_eval(ch, a, r, t)).max() < 1e-15


def test_phi0_at_boundary(tref_chart):
    ch = tref_chart
    a, t = 2.3, 0.4
    k, tau, dk = ch.kappa(a), ch.tau(a), ch.kappa(a, 1)
    expected = -(ch.eps ** 3 / 4) * (tau * k * np.sin(t) - dk * np.cos(t))
    assert phi0_eval(ch, a, 1.0, t) == pytest.approx(expected, rel=1e-14)


def test_transverse_laplacian_of_phi0(tref_chart):
    g = TubeGrid(tref_chart, 32, 10, 16)
    ch = tref_chart
    phi = np.broadcast_to(phi0_eval(ch, g.A3, g.R3, g.T3), g.shape)
    lap_y = g.d_rr(phi) + g.d_r(phi) / g.R3 + g.d_theta(phi, 2) / g.R3 ** 2
    k, tau, dk = (g.curve3(v) for v in (g.kap, g.tau, g.dkap))
    expected = ch.eps ** 3 * g.R3 * (tau * k * np.sin(g.T3) - dk * np.cos(g.T3))
    scale = np.abs(expected).max()
    assert np.abs(lap_y - expected).max() <= 1e-12 * max(scale, 1.0)


# -- gradient -------------------------------------------------------------------

def test_gradient_of_zero(tref_chart):
    g = TubeGrid(tref_chart, 16, 8, 16)
    out = gradient_eval(tref_chart, TubeScalarField(g, np.zeros(g.shape)), 1.0, 0.5, 0.3)
    assert np.all(out == 0.0)


def test_gradient_of_phi0_tangent_at_boundary(tref_chart):
    g = TubeGrid(tref_chart, 64, 10, 16)
    phi = TubeScalarField.from_function(g, lambda a, r, t: phi0_eval(tref_chart, a, r, t))
    out = gradient_eval(tref_chart, phi, g.alpha[::8], 1.0, 0.9)
    assert np.abs(out[:, 1]).max() < 1e-13


def test_gradient_matches_finite_differences(h_tref):
    psi = h_tref.psi
    ch = h_tref.chart
    a0, r0, t0 = 4.2, 0.6, 2.2
    d = 1e-3

    def val(a, r, t):
        return float(h_tref.spectral.evaluate(a, [r], [t], ["psi"])["psi"][0])

    def fd(f, x):
        return (-f(x + 2 * d) + 8 * f(x + d) - 8 * f(x - d) + f(x - 2 * d)) / (12 * d)

    pa = fd(lambda a: val(a, r0, t0), a0)
    pr = fd(lambda r: val(a0, r, t0), r0)
    pt = fd(lambda t: val(a0, r0, t), t0)
    kap, tau = ch.kappa(a0), ch.tau(a0)
    B = 1 - ch.eps * kap * r0 * np.cos(t0)
    A = B ** 2 + (ch.eps * tau * r0) ** 2
    expected = np.array([(pa + tau * pt) / B ** 2, pr / ch.eps ** 2,
                         (A * pt + ch.eps ** 2 * r0 ** 2 * tau * pa) / (ch.eps * r0 * B) ** 2])
    got = gradient_eval(ch, psi, a0, r0, t0)[0]
    assert np.abs(got - expected).max() <= 1e-6 * np.abs(expected).max()


def test_axis_evaluation_requires_cartesian(h_tref):
    with pytest.raises(AxisEvaluation):
        h_tref.value(1.0, 1e-3, 0.0, polar=True)
    fv = h_tref.value(1.0, 1e-3, 0.0, polar=False)
    assert np.all(np.isfinite(fv.v_y))


# -- harmonic field -------------------------------------------------------------

def test_circle_field_is_h0(unit_circle):
    ch = TubeChart(unit_circle, 0.1)
    h = solve_harmonic(ch, 16, 8, 16)
    assert h.zero
    fv = h.value(0.5, np.array([0.3, 1.0]), np.array([0.0, 2.0]))
    va, _, vt = h0_eval(ch, 0.5, fv.r, fv.theta)
    np.testing.assert_allclose(fv.v_alpha, va, rtol=1e-14)
    np.testing.assert_allclose(fv.v_theta, vt, atol=1e-13)
    assert harmonic_eval(ch, None).zero


def test_boundary_tangency(h_tref):
    assert h_tref.boundary_normal_max() <= 1e-10
    fv = h_tref.value(3.3, np.ones(16), np.linspace(0, 2 * np.pi, 16, endpoint=False))
    assert np.abs(fv.v_r).max() <= 1e-10


def _euclid_field(h, x):
    a, y = h.chart.from_cartesian(x)
    r = np.hypot(y[:, 0], y[:, 1])
    t = np.arctan2(y[:, 1], y[:, 0])
    return h.cartesian(a, r, t)


def test_curl_free_by_euclidean_finite_differences(h_tref):
    ch = h_tref.chart
    rng = np.random.default_rng(3)
    pts = ch.polar_to_cartesian(rng.uniform(0, ch.length, 4)[:, None], rng.uniform(0.2, 0.8, 4)[:, None],
                                rng.uniform(0, 2 * np.pi, 4)[:, None])[:, 0, :]
    d = 1e-3 * ch.eps
    hnorm = np.abs(_euclid_field(h_tref, pts)).max()
    for x in pts:
        J = np.empty((3, 3))  # J[i, j] = d h_i / d x_j
        for j in range(3):
            e = np.zeros(3)
            e[j] = d
            st = np.stack([x + 2 * e, x + e, x - e, x - 2 * e])
            f = _euclid_field(h_tref, st)
            J[:, j] = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * d)
        curl = np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
        div = np.trace(J)
        assert np.abs(curl).max() <= 1e-6 * hnorm
        assert abs(div) <= 1e-6 * hnorm / ch.eps


def test_first_order_structure(tref):
    consts = []
    for eps in (0.1, 0.05):
        h = solve_harmonic(TubeChart(tref, eps), 128, 12, 24)
        g = h.grid
        r = g.r[g.r > 0.2]
        dev = 0.0
        for a in g.alpha[::8]:
            R, T = np.meshgrid(r, g.theta, indexing="ij")
            fv = h.value(a, R.ravel(), T.ravel())
            dev = max(dev, np.abs(fv.v_alpha - 1).max() + np.abs(fv.v_theta - h.chart.tau(a)).max())
        consts.append(dev / eps)
    assert 0.5 <= consts[1] / consts[0] <= 2.0


def test_asymptotic_check_circle(unit_circle):
    psis = [TubeScalarField(TubeGrid(TubeChart(unit_circle, e), 16, 8, 16), np.zeros((16, 8, 16)))
            for e in (0.1, 0.05)]
    rep = asymptotic_check(psis)
    assert max(rep.dy_defects + rep.dtheta_defects) < 1e-10
    assert rep.eps == [0.1, 0.05]


# -- local Beltrami model ---------------------------------------------------------

def test_model_beltrami_records(h_tref):
    m0 = model_beltrami(h_tref, 0.0)
    assert m0.bound.alpha_bound == 0.0 and m0.bound.y_bound == 0.0
    assert m0.tag == "model-beltrami"
    fv0, fv1 = h_tref.value(2.0, 0.5, 1.0), m0.value(2.0, 0.5, 1.0)
    np.testing.assert_array_equal(fv0.v_alpha, fv1.v_alpha)
    eps = 0.05
    lam = eps ** 3
    rec = model_beltrami(h_tref, lam).bound
    rec.eps = eps
    assert rec.alpha_bound == pytest.approx(eps ** 4)
    assert rec.y_bound == pytest.approx(eps ** 3)
    with pytest.raises(LambdaTooLarge):
        model_beltrami(h_tref, 10.0, lambda_max=1.0)
