"""Verification of global fields: Beltrami residual, Helmholtz defect,
divergence, decay along rays and the viscous decay factor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import _LEVI
from .fit import fibonacci_sphere


def sample_grid(center, half_width, n: int = 20) -> np.ndarray:
    """``n^3`` points of a cube ``center +- half_width`` (cell centers)."""
    t = (np.arange(n) + 0.5) / n * 2 - 1
    X, Y, Z = np.meshgrid(t, t, t, indexing="ij")
    return np.asarray(center, dtype=float) + half_width * np.stack([X, Y, Z], -1).reshape(-1, 3)


def _fd_jacobian(f, x, h):
    """4th-order central differences: ``J[n, a, k] = d_k f_a``."""
    x = np.atleast_2d(x)
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        d = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
        cols.append(d)
    return np.stack(cols, -1)


def fd_curl(f, x, h=1e-3):
    """Curl of a vector field callable by 4th-order finite differences."""
    return np.einsum("abc,...cb->...a", _LEVI, _fd_jacobian(f, x, h))


@dataclass
class ResidualReport:
    residual: float          # max |curl u - lam u| / (|lam| max |u|), closed form
    divergence: float        # max |div u| / (|lam| max |u|)
    fd_residual: float | None = None
    fd_step: float | None = None

    def to_dict(self):
        return dict(self.__dict__)


def beltrami_residual(u, lam: float, points, fd_step: float | None = None) -> ResidualReport:
    """Relative Beltrami residual of ``u`` on ``points``.

    ``u`` must provide ``derivatives(x, 1)``; the closed-form curl is cross
    checked against 4th-order differences when ``fd_step`` is given.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    val, J = u.derivatives(points, 1)
    scale = abs(lam) * float(np.abs(val).max())
    if scale == 0:
        scale = 1.0
    curl = np.einsum("abc,...cb->...a", _LEVI, J)
    res = float(np.abs(curl - lam * val).max()) / scale
    div = float(np.abs(np.trace(J, axis1=-2, axis2=-1)).max()) / scale
    rep = ResidualReport(res, div)
    if fd_step:
        fc = fd_curl(lambda x: u.derivatives(x, 0)[0], points, fd_step)
        rep.fd_residual = float(np.abs(fc - lam * val).max()) / scale
        rep.fd_step = fd_step
    return rep


def helmholtz_defect(w, points, h: float = 1e-2) -> float:
    """``max |Delta_h w + lam^2 w| / (lam^2 max |w|)`` with a 4th-order FD Laplacian."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    w0 = w(points)
    lap = np.zeros_like(w0)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        lap += (-w(points + 2 * e) + 16 * w(points + e) - 30 * w0
                + 16 * w(points - e) - w(points - 2 * e)) / (12 * h * h)
    lam = w.lam
    return float(np.abs(lap + lam ** 2 * w0).max()) / (lam ** 2 * float(np.abs(w0).max()))


@dataclass
class DecayReport:
    radii: np.ndarray
    weighted: np.ndarray          # max over rays of |x - c| |u| at each radius
    window_max: np.ndarray        # maxima over log-spaced windows beyond the onset radius
    growth: float                 # last window max / first window max
    slope: float                  # least-squares log-log slope of the window maxima
    bounded: bool
    onset: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(radii=self.radii.tolist(), weighted=self.weighted.tolist(),
                    window_max=self.window_max.tolist(), growth=self.growth, slope=self.slope,
                    bounded=self.bounded, onset=self.onset, sup=float(self.weighted.max()))


def decay_check(u, R: float, center=(0.0, 0.0, 0.0), n_rays: int = 26, n_radii: int = 400,
                r_max_factor: float = 50.0, onset_factor: float = 5.0, n_windows: int = 4,
                growth_tol: float = 1.5, slope_tol: float = 0.2) -> DecayReport:
    """Sample ``|x - c| |u(x)|`` along rays for ``R <= |x - c| <= 50 R``.

    Beyond ``onset_factor * R`` the radii are split into ``n_windows``
    log-spaced windows; the field is flagged when the last window maximum
    exceeds the first by ``growth_tol`` or the log-log slope of the window
    maxima exceeds ``slope_tol``.
    """
    center = np.asarray(center, dtype=float)
    rays = fibonacci_sphere(n_rays)
    radii = R * np.geomspace(1.0, r_max_factor, n_radii)
    pts = center + radii[:, None, None] * rays[None]
    val = np.asarray(u(pts.reshape(-1, 3))).reshape(n_radii, n_rays, 3)
    weighted = (radii[:, None] * np.linalg.norm(val, axis=-1)).max(axis=1)
    onset = onset_factor * R
    sel = radii >= onset
    edges = np.geomspace(onset, radii[-1] * (1 + 1e-12), n_windows + 1)
    wmax, wmid = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = sel & (radii >= lo) & (radii < hi)
        if np.any(m):
            wmax.append(weighted[m].max())
            wmid.append(np.sqrt(lo * hi))
    wmax, wmid = np.array(wmax), np.array(wmid)
    growth = float(wmax[-1] / wmax[0]) if wmax[0] > 0 else np.inf
    slope = float(np.polyfit(np.log(wmid), np.log(wmax), 1)[0]) if len(wmax) > 1 else 0.0
    bounded = bool(np.isfinite(weighted).all() and growth <= growth_tol and slope <= slope_tol)
    return DecayReport(radii, weighted, wmax, growth, slope, bounded, onset)


def navier_stokes_factor(lam: float, nu: float, t: float) -> float:
    """``exp(-nu lam^2 t)``: ``u(x) exp(-nu lam^2 t)`` solves Navier-Stokes when ``u`` is Beltrami."""
    if t < 0 or nu < 0:
        raise ValueError("viscosity and time must be non-negative")
    return float(np.exp(-nu * lam ** 2 * t))
