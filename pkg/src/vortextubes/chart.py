"""Tubular coordinates ``(alpha, r, theta)`` around a closed curve.

A point of the tube is ``gamma(alpha) + eps * r * (cos(theta) e1 + sin(theta) e2)``.
We take ``e1 = n`` (principal normal) and ``e2 = -b``; with this orientation of
the transverse plane the metric has the cross term ``-2 eps^2 tau r^2 dtheta dalpha``
for the standard torsion ``tau = (g' x g'') . g''' / |g' x g''|^2``, and

    d_alpha x + tau d_theta x = B t,     B = 1 - eps kappa r cos(theta).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curves import ClosedCurve, arclength_reparam, check_admissible
from .errors import DegenerateChart


@dataclass(frozen=True)
class LaplacianCoefficients:
    """Coefficients of the Laplacian in ``(alpha, r, theta)``.

    ``lap = rr*psi_rr + r_*psi_r + thth*psi_thth + aa*psi_aa + ath*psi_ath
    + th*psi_th + a*psi_a``.
    """

    rr: np.ndarray
    r_: np.ndarray
    thth: np.ndarray
    aa: np.ndarray
    ath: np.ndarray
    th: np.ndarray
    a: np.ndarray


@dataclass(frozen=True)
class MetricData:
    A: np.ndarray
    B: np.ndarray
    g_aa: np.ndarray
    g_ath: np.ndarray
    g_rr: float
    g_thth: np.ndarray
    volume: np.ndarray  # dV = eps^2 * volume * r dalpha dr dtheta
    laplacian: LaplacianCoefficients


def laplacian_coefficients(eps, r, theta, kap, tau, dkap, dtau) -> LaplacianCoefficients:
    """Coefficient arrays of the tube Laplacian (broadcasting inputs)."""
    c, s = np.cos(theta), np.sin(theta)
    B = 1.0 - eps * kap * r * c
    A = B ** 2 + (eps * tau * r) ** 2
    B2, B3 = B ** 2, B ** 3
    one = np.ones(np.broadcast(B, r).shape)
    return LaplacianCoefficients(
        rr=one / eps ** 2,
        r_=1.0 / (eps ** 2 * r) - kap * c / (eps * B),
        thth=A / (eps * r * B) ** 2,
        aa=1.0 / B2,
        ath=2.0 * tau / B2,
        th=(dtau - eps * r * (kap * dtau - dkap * tau) * c) / B3
        + kap * s * (B2 - (eps * tau * r) ** 2) / (eps * r * B3),
        a=eps * r * (dkap * c - tau * kap * s) / B3,
    )


class TubeChart:
    """Thin tube of thickness ``eps`` around an arc-length parametrized curve.

    Parameters
    ----------
    curve : ClosedCurve
        Core curve; reparametrized by arc length if needed.
    eps : float
        Tube radius.
    check : bool
        Raise :class:`DegenerateChart` when ``eps * kappa_max >= 1``.
    """

    def __init__(self, curve: ClosedCurve, eps: float, check: bool = True):
        if not curve.is_arclength:
            curve = arclength_reparam(curve)
        self.curve = curve
        self.eps = float(eps)
        self.length = curve.length
        if check:
            kmax = float(np.max(curve.curvature(curve.alpha)))
            if self.eps * kmax >= 1.0:
                raise DegenerateChart(f"eps*kappa_max = {self.eps * kmax:.3g} >= 1")

    def __repr__(self):
        return f"TubeChart(eps={self.eps}, length={self.length:.6g}, modes={self.curve.modes})"

    # -- curve scalars -------------------------------------------------------
    def kappa(self, alpha, deriv: int = 0):
        return self.curve.kappa_series(alpha, deriv)

    def tau(self, alpha, deriv: int = 0):
        return self.curve.tau_series(alpha, deriv)

    @cached_property
    def admissibility(self):
        return check_admissible(self.curve, self.eps)

    # -- frames --------------------------------------------------------------
    def transverse_frame(self, alpha):
        """``(t, e1, e2)`` with ``e1 = n`` and ``e2 = -b``."""
        fr = self.curve.frame(alpha)
        return fr.t, fr.n, -fr.b

    def to_cartesian(self, alpha, y):
        """Map ``(alpha, y)`` (``y`` of shape ``(..., 2)``) to R^3."""
        alpha = np.asarray(alpha, dtype=float)
        y = np.asarray(y, dtype=float)
        _, e1, e2 = self.transverse_frame(alpha)
        return self.curve(alpha) + self.eps * (y[..., :1] * e1 + y[..., 1:2] * e2)

    def polar_to_cartesian(self, alpha, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        y = np.stack(np.broadcast_arrays(r * np.cos(theta), r * np.sin(theta)), axis=-1)
        return self.to_cartesian(alpha, y)

    def from_cartesian(self, x, alpha_guess=None, tol=1e-13, maxiter=50):
        """Inverse chart: nearest-point projection onto the core.

        Returns ``(alpha, y)``; valid inside the tube (below the reach).
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        curve = self.curve
        if alpha_guess is None:
            grid = curve.alpha
            pts = curve(grid)
            idx = np.argmin(((x[:, None, :] - pts[None]) ** 2).sum(-1), axis=1)
            a = grid[idx]
        else:
            a = np.broadcast_to(np.asarray(alpha_guess, dtype=float), x.shape[:1]).copy()
        # Newton on f(a) = (x - g(a)) . g'(a) = 0
        for _ in range(maxiter):
            d = x - curve(a)
            g1 = curve.derivative(a, 1)
            g2 = curve.derivative(a, 2)
            f = np.sum(d * g1, -1)
            fp = np.sum(d * g2, -1) - np.sum(g1 * g1, -1)
            step = f / fp
            a = a - step
            if np.max(np.abs(step)) < tol:
                break
        a = np.mod(a, self.length)
        _, e1, e2 = self.transverse_frame(a)
        d = (x - curve(a)) / self.eps
        y = np.stack([np.sum(d * e1, -1), np.sum(d * e2, -1)], -1)
        return a, y

    # -- metric --------------------------------------------------------------
    def B(self, alpha, r, theta):
        return 1.0 - self.eps * self.kappa(alpha) * r * np.cos(theta)

    def metric(self, alpha, r, theta) -> MetricData:
        """Metric components, volume factor and Laplacian coefficients.

        Raises
        ------
        DegenerateChart
            If ``B <= 0`` at the requested point(s).
        """
        alpha, r, theta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, r, theta)))
        kap, tau = self.kappa(alpha), self.tau(alpha)
        eps = self.eps
        B = 1.0 - eps * kap * r * np.cos(theta)
        if np.any(B <= 0):
            raise DegenerateChart("B <= 0 inside the requested region")
        A = B ** 2 + (eps * tau * r) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = laplacian_coefficients(eps, r, theta, kap, tau, self.kappa(alpha, 1), self.tau(alpha, 1))
        return MetricData(A=A, B=B, g_aa=A, g_ath=-eps ** 2 * tau * r ** 2, g_rr=eps ** 2,
                          g_thth=(eps * r) ** 2, volume=B, laplacian=lap)

    def tube_volume(self) -> float:
        """Euclidean volume: ``eps^2 int B dalpha dy = pi eps^2 length`` (the ``cos`` term integrates out)."""
        return np.pi * self.eps ** 2 * self.length
