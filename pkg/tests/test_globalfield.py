"""Global Beltrami fields: Green's function, fits, projection, verification."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import spherical_jn

from vortextubes.curves import circle
from vortextubes.errors import AtSingularity, IllConditioned, MisfitAboveTol, TubesOverlap
from vortextubes.globalfield import (BesselSeriesField, GlobalBeltramiField, PlaneWaveField, PointSourceField,
                                     TargetSet, beltrami_project, beltrami_residual, bessel_fit,
                                     check_disjoint, decay_check, fibonacci_sphere, field_from_dict, greens,
                                     greens_derivatives, helmholtz_defect, mfs_fit, navier_stokes_factor,
                                     radial_helmholtz_defect, sample_grid, spherical_j)
from vortextubes.globalfield.checks import fd_curl

RNG = np.random.default_rng(11)


# -- Green's function ----------------------------------------------------------------

def test_greens_examples():
    assert abs(greens(np.array([np.pi / 2, 0, 0]), 1.0)) < 1e-17
    assert greens(np.array([0, 1.0, 0]), 1.0) == pytest.approx(np.cos(1) / (4 * np.pi), rel=1e-15)
    assert greens(np.array([0, 1.0, 0]), 1.0) == pytest.approx(0.042996, abs=5e-7)
    with pytest.raises(AtSingularity):
        greens(np.zeros(3), 1.0)


def test_radial_identity():
    r = np.linspace(0.1, 20, 200)
    for lam in (0.5, 1.0, 3.0):
        assert np.abs(radial_helmholtz_defect(r, lam)).max() < 1e-10


def test_greens_derivatives_against_finite_differences():
    x = np.array([0.7, -0.4, 1.1])
    lam, h = 1.3, 1e-4
    G, D1, D2, D3 = greens_derivatives(x, lam, 3)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        g = greens_derivatives(np.stack([x + e, x - e]), lam, 2)
        np.testing.assert_allclose((g[0][0] - g[0][1]) / (2 * h), D1[k], rtol=1e-7)
        np.testing.assert_allclose((g[1][0] - g[1][1]) / (2 * h), D2[:, k], rtol=1e-7, atol=1e-10)
        np.testing.assert_allclose((g[2][0] - g[2][1]) / (2 * h), D3[:, :, k], rtol=1e-6, atol=1e-9)
    # Helmholtz: trace of the Hessian = -lam^2 G
    assert np.trace(D2) == pytest.approx(-lam ** 2 * G, rel=1e-12)


# -- spherical Bessel functions ------------------------------------------------------------

def test_j0_identities():
    t = np.array([0.3, 1.0, np.pi, 7.5])
    j = spherical_j(3, t)
    np.testing.assert_allclose(j[0], np.sin(t) / t, rtol=1e-14, atol=1e-16)
    assert abs(j[0][2]) < 1e-15


@settings(deadline=None, max_examples=25)
@given(t=st.floats(1e-6, 60.0))
def test_spherical_j_against_scipy(t):
    j = spherical_j(12, np.array([t]))[:, 0]
    ref = spherical_jn(np.arange(13), t)
    assert np.all(np.abs(j - ref) <= 1e-13 * np.maximum(1.0, np.abs(ref)) + 1e-300)


def test_spherical_j_tiny_argument():
    # j_l(t) ~ t^l / (2l+1)!!: no underflow to zero or cancellation
    t = 1e-3
    j = spherical_j(6, np.array([t]))[:, 0]
    df = np.array([1, 3, 15, 105, 945, 10395, 135135], dtype=float)
    np.testing.assert_allclose(j, t ** np.arange(7) / df, rtol=1e-6)


# -- representations -------------------------------------------------------------------

def _random_bessel(L=4, lam=1.7):
    from vortextubes.globalfield.bessel import real_index
    c = RNG.normal(size=(len(real_index(L)), 3))
    return BesselSeriesField(lam, L, c, np.array([0.2, -0.1, 0.3]), 2.0)


def _random_sources(lam=1.2):
    return PointSourceField(lam, fibonacci_sphere(6, 5.0), RNG.normal(size=(6, 3)))


@pytest.mark.parametrize("make", [_random_bessel, _random_sources])
def test_helmholtz_identity(make):
    w = make()
    pts = RNG.uniform(-1, 1, (20, 3))
    assert helmholtz_defect(w, pts, h=1e-2) <= 1e-7


@pytest.mark.parametrize("make", [_random_bessel, _random_sources])
def test_closed_form_jacobian_matches_fd(make):
    w = make()
    pts = RNG.uniform(-1, 1, (10, 3))
    J = w.jacobian(pts)
    h = 1e-4
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (w(pts + e) - w(pts - e)) / (2 * h)
        np.testing.assert_allclose(J[..., k], fd, rtol=1e-6, atol=1e-8 * np.abs(J).max())


@pytest.mark.parametrize("make", [_random_bessel, _random_sources, lambda: PlaneWaveField.abc(1.4, 1, 0.7, 0.3)])
def test_serialization_round_trip(make):
    w = make()
    w2 = field_from_dict(json.loads(json.dumps(w.to_dict())))
    pts = RNG.uniform(-1, 1, (5, 3))
    np.testing.assert_array_equal(w(pts), w2(pts))


# -- Beltrami projection ----------------------------------------------------------------

def test_projection_keeps_plus_eigenfield():
    w = PlaneWaveField.abc(1.3, 1.0, 0.8, 0.5, sign=+1)
    pts = sample_grid([0.1, 0.2, 0.3], 2.0, 6)
    assert np.abs(w.curl(pts) - 1.3 * w(pts)).max() < 1e-13
    u = beltrami_project(w)
    assert np.abs(u(pts) - w(pts)).max() <= 1e-10 * np.abs(w(pts)).max()


def test_projection_annihilates_minus_eigenfield():
    w = PlaneWaveField.abc(1.3, 1.0, 0.8, 0.5, sign=-1)
    pts = sample_grid([0.0, 0.0, 0.0], 2.0, 6)
    assert np.abs(beltrami_project(w)(pts)).max() <= 1e-10 * np.abs(w(pts)).max()


def test_projection_of_gradient_field_vanishes():
    # w = grad(sin(lam k.x)) / lam is curl-free and solves Helmholtz
    k = np.array([[1.0, 2.0, -0.5]])
    lam = 0.9
    w = PlaneWaveField(lam, k, k / np.linalg.norm(k), [0.0])
    pts = sample_grid([0.0, 0.0, 0.0], 1.5, 5)
    assert np.abs(w.curl(pts)).max() < 1e-14
    assert np.abs(beltrami_project(w)(pts)).max() <= 1e-10 * np.abs(w(pts)).max()


@pytest.mark.parametrize("make", [_random_bessel, _random_sources])
def test_projected_fields_are_beltrami(make):
    w = make()
    u = beltrami_project(w)
    pts = sample_grid([0.0, 0.0, 0.0], 1.0, 8)
    rep = beltrami_residual(u, w.lam, pts, fd_step=1e-3)
    assert rep.residual <= 1e-8
    assert rep.divergence <= 1e-8
    assert rep.fd_residual <= 1e-6


@pytest.mark.parametrize("make", [_random_bessel, _random_sources])
def test_projection_is_idempotent(make):
    """P[u] = (curl curl u + lam curl u) / (2 lam^2) = u for u = P[w]; the
    outer curl is taken by 4th-order differences of the closed-form curl."""
    w = make()
    u = beltrami_project(w)
    lam = w.lam
    pts = RNG.uniform(-0.8, 0.8, (8, 3))
    cu = u.curl(pts)
    ccu = fd_curl(u.curl, pts, 1e-3)
    Pu = (ccu + lam * cu) / (2 * lam ** 2)
    assert np.abs(Pu - u(pts)).max() <= 1e-9 * np.abs(u(pts)).max()


def test_projection_lambda_mismatch():
    with pytest.raises(ValueError):
        beltrami_project(_random_sources(1.0), 2.0)


def test_residual_detects_corruption():
    w = _random_bessel()
    u = GlobalBeltramiField(w)
    u.lam = 1.1 * w.lam  # corrupted eigenvalue in the projection
    pts = sample_grid([0.0, 0.0, 0.0], 1.0, 6)
    assert beltrami_residual(u, w.lam, pts).residual > 1e-3


# -- fits ------------------------------------------------------------------------------

def _ball_targets(field, n=300, heldout=100, radius=1.0):
    p = RNG.normal(size=(n + heldout, 3))
    p = radius * p / np.linalg.norm(p, axis=1, keepdims=True) * RNG.uniform(0.3, 1.0, (n + heldout, 1))
    v = field(p)
    return TargetSet(p[:n], v[:n], p[n:], v[n:])


def test_mfs_recovers_single_source():
    lam = 1.1
    z = np.array([[0.0, 0.0, 4.0]])
    c = np.array([[0.3, -1.0, 0.5]])
    truth = PointSourceField(lam, z, c)
    t = _ball_targets(truth)
    sources = np.vstack([z, fibonacci_sphere(20, 5.0)])
    w, rep = mfs_fit(t, lam, sources, reg=0.0)
    assert rep.misfit <= 1e-12
    np.testing.assert_allclose(w.coeffs[0], c[0], atol=1e-10)
    assert np.abs(w.coeffs[1:]).max() < 1e-9


def test_mfs_sources_must_be_outside_2R():
    t = _ball_targets(_random_sources())
    with pytest.raises(ValueError):
        mfs_fit(t, 1.2, fibonacci_sphere(10, 1.5))


def test_mfs_linearity():
    lam = 1.0
    z = fibonacci_sphere(30, 4.0)
    a = PointSourceField(lam, z[:1], [[1.0, 0.0, 0.0]])
    b = PointSourceField(lam, z[7:8], [[0.0, 2.0, -1.0]])
    pts = _ball_targets(a).points
    ta = TargetSet(pts, a(pts))
    tb = TargetSet(pts, b(pts))
    tab = TargetSet(pts, a(pts) + b(pts))
    wa, _ = mfs_fit(ta, lam, z, reg=0.0)
    wb, _ = mfs_fit(tb, lam, z, reg=0.0)
    wab, _ = mfs_fit(tab, lam, z, reg=0.0)
    assert np.abs(wab.coeffs - wa.coeffs - wb.coeffs).max() <= 1e-8


def test_mfs_refinement_is_monotone():
    """Nested source sets: the least-squares misfit cannot grow with more sources."""
    lam = 1.0
    truth = PointSourceField(lam, [[0.0, 0.0, 2.6]], [[1.0, 0.5, 0.0]])  # not representable
    t = _ball_targets(truth, 600, 200)
    pool = fibonacci_sphere(400, 3.0)[RNG.permutation(400)]
    fits = [mfs_fit(t, lam, pool[:n], reg=0.0)[1].fit_misfit for n in (50, 100, 200, 400)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(fits, fits[1:]))


def test_fit_error_reporting():
    t = _ball_targets(_random_sources())
    with pytest.raises(MisfitAboveTol) as exc:
        mfs_fit(t, 1.2, fibonacci_sphere(4, 3.0), reg=0.0, tol=1e-12)
    assert exc.value.misfit > 1e-12
    with pytest.raises(IllConditioned):
        mfs_fit(t, 1.2, fibonacci_sphere(200, 3.0), reg=0.0, cond_max=10.0)


def test_bessel_recovers_j0_mode():
    lam = 2.0
    v = np.array([0.5, -1.0, 2.0])
    c = np.array([0.1, 0.2, -0.1])

    def target(x):
        r = np.linalg.norm(x - c, axis=-1)
        return np.sinc(lam * r / np.pi)[:, None] * v

    t = _ball_targets(target, radius=1.0)
    for L in (0, 3):
        w, rep = bessel_fit(t, lam, L, ball=(c, 1.2))
        assert rep.misfit <= 1e-12


def test_bessel_exact_for_its_own_span():
    w0 = _random_bessel(L=3, lam=1.5)
    t = _ball_targets(w0, radius=2.0)
    _, rep = bessel_fit(t, 1.5, 3, ball=(w0.center, w0.scale))
    assert rep.misfit <= 1e-10


# -- decay ----------------------------------------------------------------------------------

def test_decay_single_mode_bounded():
    w = BesselSeriesField(1.0, 0, np.array([[1.0, 0.0, 0.0]]))
    rep = decay_check(w, 2.0)
    assert rep.bounded
    assert rep.weighted.max() <= 1.0 + 1e-12  # |x| |j0(|x|)| = |sin|x|| <= 1


def test_decay_flags_growth():
    w = BesselSeriesField(1.0, 0, np.array([[1.0, 0.0, 0.0]]))

    def grown(x):
        return np.linalg.norm(x, axis=-1)[:, None] * w(x)

    assert not decay_check(grown, 2.0).bounded


# -- Navier-Stokes factor and tube geometry ----------------------------------------------------

def test_navier_stokes_factor():
    assert navier_stokes_factor(0.7, 2.0, 0.0) == 1.0
    assert navier_stokes_factor(0.7, 0.0, 1e9) == 1.0
    assert navier_stokes_factor(0.1 ** 3, 1.0, 1e6) == pytest.approx(np.exp(-1.0), rel=1e-12)
    assert navier_stokes_factor(0.1 ** 3, 1.0, 1e6) == pytest.approx(0.367879, abs=5e-7)
    with pytest.raises(ValueError):
        navier_stokes_factor(1.0, -1.0, 1.0)


def test_overlapping_tubes():
    a, b = circle(1.0), circle(1.0, (0.05, 0.0, 0.0))
    with pytest.raises(TubesOverlap):
        check_disjoint([a, b], 0.1)
    check_disjoint([a, circle(1.0, (0.0, 0.0, 5.0))], 0.1)
