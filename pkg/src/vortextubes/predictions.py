"""Closed-form thin-tube predictions and their variation under binormal
deformations of the core curve.

All integrals are over one period of the arc-length parameter and use the
periodic trapezoid rule on curvature/torsion evaluated from the Fourier
representation of the curve (derivatives are spectral).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ClosedCurve, arclength_reparam, make_fourier_curve
from .errors import AdmissibilityLost, ConvergenceFailure, FlatPoint, ZeroSpeed


def _arclength(curve: ClosedCurve) -> ClosedCurve:
    return curve if curve.is_arclength else arclength_reparam(curve)


def _nodes(curve: ClosedCurve, n: int | None):
    n = n or curve.sample_count
    return np.arange(n) * curve.length / n, curve.length / n


def herman_factor(eps: float) -> float:
    """``-5 pi eps^2 / 8``."""
    return -5.0 * np.pi * eps ** 2 / 8.0


@dataclass
class PredictionSet:
    """Leading-order predictions for a tube of thickness ``eps``.

    ``omega`` is the rotation number of the boundary map, ``normal_torsion``
    its normal torsion, ``theta_sin`` the ``sin`` coefficient of the
    conjugacy ``Theta(v) - v``.
    """

    eps: float
    omega: float
    normal_torsion: float
    theta_sin: float
    total_torsion: float
    kappa2_tau: float
    d_omega: float | None = None
    d_normal_torsion: float | None = None

    def to_dict(self):
        return dict(self.__dict__)


def predict(curve: ClosedCurve, eps: float, n: int | None = None) -> PredictionSet:
    """``omega = int tau``, ``N = -(5 pi eps^2/8) int kappa^2 tau`` and the
    conjugacy coefficient ``-eps kappa(0)/4``."""
    curve = _arclength(curve)
    s, h = _nodes(curve, n)
    kap, tau = curve.curvature(s), curve.torsion(s)
    T = float(np.sum(tau) * h)
    K2T = float(np.sum(kap ** 2 * tau) * h)
    k0 = float(curve.curvature(0.0))
    return PredictionSet(float(eps), T, herman_factor(eps) * K2T, -eps * k0 / 4, T, K2T)


def binormal_deform(curve: ClosedCurve, F, delta: float, n: int | None = None,
                    kappa_tol: float = 1e-8) -> ClosedCurve:
    """``Gamma = gamma + delta F e2`` reparametrized by arc length.

    ``e2 = -b`` is the second transverse vector of the tube chart, so
    ``F`` is a function of the arc-length parameter of ``curve`` with period
    equal to its length.

    Raises
    ------
    AdmissibilityLost
        If the deformed curve stops being immersed or has a flat point.
    """
    curve = _arclength(curve)
    if delta == 0:
        return curve
    L = curve.length
    n = n or max(1024, 4 * curve.sample_count)
    n += n % 2
    s = np.arange(n) * L / n
    fr = curve.frame(s)
    P = curve(s) - delta * np.asarray(F(s), dtype=float)[:, None] * fr.b
    co = np.fft.rfft(P, axis=0) / n
    M = n // 2 - 1
    cos = np.vstack([co[0].real, 2 * co[1:M + 1].real])
    sin = np.vstack([np.zeros(3), -2 * co[1:M + 1].imag])
    # drop negligible modes so the reparametrization stays cheap
    amp = np.abs(cos).max(1) + np.abs(sin).max(1)
    keep = np.nonzero(amp > 1e-15 * amp.max())[0]
    M = max(int(keep.max()), 1)
    try:
        raw = make_fourier_curve((cos[:M + 1], sin[:M + 1]), M, period=L)
        out = arclength_reparam(raw)
        kmin = float(out.curvature(out.alpha).min())
    except (ZeroSpeed, FlatPoint, ConvergenceFailure) as exc:
        raise AdmissibilityLost(str(exc)) from exc
    if kmin <= kappa_tol:
        raise AdmissibilityLost(f"deformed curvature reaches {kmin:.2e}")
    out.meta.update(dict(curve.meta), deformation=dict(delta=float(delta)))
    return out


@dataclass
class GenericityDerivatives:
    d_omega: float
    d_normal_torsion: float

    def to_dict(self):
        return dict(d_omega=self.d_omega, d_normal_torsion=self.d_normal_torsion)


def genericity_derivatives(curve: ClosedCurve, F, eps: float, n: int | None = None) -> GenericityDerivatives:
    """Leading terms of ``d omega / d delta`` and ``d N / d delta`` for the
    family :func:`binormal_deform`:

    ``int kappa' F`` and
    ``-(5 pi eps^2/8) int (2 kappa''' + 3 kappa^2 kappa' - 6 kappa tau tau' - 6 tau^2 kappa') F``.
    """
    curve = _arclength(curve)
    s, h = _nodes(curve, n)
    ks, ts = curve.kappa_series, curve.tau_series
    k, k1, k3 = ks(s), ks(s, 1), ks(s, 3)
    t, t1 = ts(s), ts(s, 1)
    f = np.asarray(F(s), dtype=float)
    d_om = float(np.sum(k1 * f) * h)
    integrand = 2 * k3 + 3 * k ** 2 * k1 - 6 * k * t * t1 - 6 * t ** 2 * k1
    d_n = herman_factor(eps) * float(np.sum(integrand * f) * h)
    return GenericityDerivatives(d_om, d_n)


def central_difference(curve: ClosedCurve, F, eps: float, delta: float = 1e-4) -> GenericityDerivatives:
    """``(predict(deform(delta)) - predict(deform(-delta))) / (2 delta)``."""
    p = predict(binormal_deform(curve, F, delta), eps)
    m = predict(binormal_deform(curve, F, -delta), eps)
    return GenericityDerivatives((p.omega - m.omega) / (2 * delta),
                                 (p.normal_torsion - m.normal_torsion) / (2 * delta))


def predict_with_profile(curve: ClosedCurve, eps: float, F) -> PredictionSet:
    """:func:`predict` plus the genericity derivatives for profile ``F``."""
    ps = predict(curve, eps)
    g = genericity_derivatives(curve, F, eps)
    ps.d_omega, ps.d_normal_torsion = g.d_omega, g.d_normal_torsion
    return ps
