"""Closed analytic space curves given as truncated Fourier series.

A curve is stored as cosine/sine coefficient rows ``cos[k], sin[k]`` (each in
R^3) so that::

    gamma(s) = cos[0] + sum_{k>=1} cos[k] cos(k w s) + sin[k] sin(k w s),   w = 2 pi / period

Arc-length curves have ``period == length``.  Curvature and torsion come from
the usual parametrization-invariant formulas, evaluated on exact derivatives of
the series.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from ._spectral import PeriodicSeries
from .errors import ConvergenceFailure, FlatPoint, ZeroSpeed

FLAT_TOL = 1e-8
ZERO_SPEED_TOL = 1e-10
REPARAM_TOL = 1e-10
ELLIPTIC_TOL = 1e-6
ELLIPTIC_NMAX = 64


@dataclass(frozen=True)
class FrenetFrame:
    """Unit tangent, principal normal and binormal (arrays of shape ``(..., 3)``)."""

    t: np.ndarray
    n: np.ndarray
    b: np.ndarray

    def orthonormality_defect(self) -> float:
        vecs = (self.t, self.n, self.b)
        worst = 0.0
        for i in range(3):
            for j in range(3):
                dot = np.sum(vecs[i] * vecs[j], axis=-1)
                worst = max(worst, float(np.max(np.abs(dot - (i == j)))))
        return worst

    def determinant(self):
        return np.sum(np.cross(self.t, self.n) * self.b, axis=-1)


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Closed curve in R^3 represented by a real Fourier series.

    Parameters
    ----------
    cos, sin : ndarray, shape (M + 1, 3)
        Coefficient rows; ``sin[0]`` is ignored (kept zero).
    period : float
        Parameter period.
    length : float
        Euclidean length of the curve.
    sample_count : int
        Size of the uniform parameter grid used for cached samples of
        curvature and torsion.
    """

    cos: np.ndarray
    sin: np.ndarray
    period: float
    length: float
    sample_count: int = 256
    meta: dict = field(default_factory=dict, compare=False)

    # ------------------------------------------------------------------ basics
    @property
    def modes(self) -> int:
        return self.cos.shape[0] - 1

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    @property
    def is_arclength(self) -> bool:
        return abs(self.period - self.length) <= 1e-12 * self.length

    def derivative(self, s, order: int = 0) -> np.ndarray:
        """``d^order gamma / ds^order`` at parameter values ``s`` (shape ``s.shape + (3,)``)."""
        s = np.asarray(s, dtype=float)
        k = np.arange(1, self.modes + 1)
        wk = k * self.omega
        phase = np.multiply.outer(s, wk) + order * np.pi / 2
        scale = (wk ** order)[:, None]
        out = np.cos(phase) @ (scale * self.cos[1:]) + np.sin(phase) @ (scale * self.sin[1:])
        if order == 0:
            out = out + self.cos[0]
        return out

    def __call__(self, s):
        return self.derivative(s, 0)

    def speed(self, s):
        return np.linalg.norm(self.derivative(s, 1), axis=-1)

    # ---------------------------------------------------------- Frenet data
    def _cross_data(self, s):
        d1 = self.derivative(s, 1)
        d2 = self.derivative(s, 2)
        c = np.cross(d1, d2)
        cn = np.linalg.norm(c, axis=-1)
        sp = np.linalg.norm(d1, axis=-1)
        if np.any(cn < FLAT_TOL * sp ** 2):
            raise FlatPoint("curvature vanishes (|g' x g''| below threshold)")
        return d1, d2, c, cn, sp

    def curvature(self, s):
        _, _, _, cn, sp = self._cross_data(s)
        return cn / sp ** 3

    def torsion(self, s):
        _, _, c, cn, _ = self._cross_data(s)
        d3 = self.derivative(s, 3)
        return np.sum(c * d3, axis=-1) / cn ** 2

    def frame(self, s) -> FrenetFrame:
        d1, _, c, cn, sp = self._cross_data(s)
        t = d1 / sp[..., None]
        b = c / cn[..., None]
        n = np.cross(b, t)
        return FrenetFrame(t, n, b)

    # ---------------------------------------------------------- cached samples
    @cached_property
    def alpha(self) -> np.ndarray:
        """Uniform parameter grid of ``sample_count`` points on ``[0, period)``."""
        return np.arange(self.sample_count) * self.period / self.sample_count

    @cached_property
    def kappa_series(self) -> PeriodicSeries:
        """Trigonometric interpolant of curvature on the sample grid."""
        return PeriodicSeries.from_samples(self.curvature(self.alpha), self.period)

    @cached_property
    def tau_series(self) -> PeriodicSeries:
        return PeriodicSeries.from_samples(self.torsion(self.alpha), self.period)

    @cached_property
    def frame_samples(self) -> FrenetFrame:
        return self.frame(self.alpha)

    # ---------------------------------------------------------- transforms
    def reversed(self) -> "ClosedCurve":
        """Same image traversed backwards, ``s -> -s``."""
        return self._replace(self.cos.copy(), -self.sin)

    def shifted(self, c: float) -> "ClosedCurve":
        """Start point moved: new curve ``s -> gamma(s + c)``."""
        k = np.arange(self.modes + 1)[:, None] * self.omega
        cc, ss = np.cos(k * c), np.sin(k * c)
        return self._replace(self.cos * cc + self.sin * ss, self.sin * cc - self.cos * ss)

    def transformed(self, R, shift=(0.0, 0.0, 0.0)) -> "ClosedCurve":
        """Similarity ``x -> R x + shift`` with ``R = c Q`` (``Q`` orthogonal, ``c > 0``).

        The parameter is kept, so a scaled arc-length curve (``c != 1``) is no
        longer parametrized by arc length.
        """
        R = np.asarray(R, dtype=float)
        c = abs(np.linalg.det(R)) ** (1.0 / 3.0)
        if c == 0 or not np.allclose(R.T @ R, c * c * np.eye(3), atol=1e-12 * c * c):
            raise ValueError("R must be a nonzero multiple of an orthogonal matrix")
        cos = self.cos @ R.T
        cos[0] += np.asarray(shift, dtype=float)
        sin = self.sin @ R.T
        sin[0] = 0.0
        return ClosedCurve(cos, sin, self.period, self.length * c, self.sample_count, dict(self.meta))

    def _replace(self, cos, sin) -> "ClosedCurve":
        sin = np.array(sin, dtype=float)
        sin[0] = 0.0
        return ClosedCurve(np.array(cos, dtype=float), sin, self.period, self.length,
                           self.sample_count, dict(self.meta))

    # ---------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        return {"modes": self.modes, "period": self.period,
                "cos": self.cos.tolist(), "sin": self.sin.tolist()}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _default_samples(modes: int) -> int:
    # curvature/torsion carry many more modes than the position series
    n = max(512, 9 * modes)
    return n + (-n) % 4


def _trapezoid_length(cos, sin, period, n):
    tmp = ClosedCurve(cos, sin, period, 1.0, n)
    return float(tmp.speed(tmp.alpha).mean() * period)


def make_fourier_curve(coeffs, modes: int | None = None, period: float = 2 * np.pi,
                       sample_count: int | None = None) -> ClosedCurve:
    """Build a curve from Fourier coefficients.

    Parameters
    ----------
    coeffs : dict or tuple
        Either ``{"cos": ..., "sin": ...}`` or ``(cos, sin)``.  ``cos`` has
        ``M + 1`` rows (mode 0 first); ``sin`` has ``M`` rows (modes 1..M) or
        ``M + 1`` rows with an ignored mode-0 row.
    modes : int, optional
        Truncation ``M``; extra rows are dropped, missing rows are zero.
    period : float
        Parameter period of the series.

    Returns
    -------
    ClosedCurve
        Non-reparametrized curve whose length is computed by trapezoid
        quadrature of the speed, refined until two resolutions agree.

    Raises
    ------
    ZeroSpeed
        If the speed vanishes on a dense sample (e.g. a constant curve).
    """
    if isinstance(coeffs, dict):
        cos, sin = coeffs["cos"], coeffs["sin"]
        period = float(coeffs.get("period", period))
        if modes is None and "modes" in coeffs:
            modes = int(coeffs["modes"])
    else:
        cos, sin = coeffs
    cos = np.atleast_2d(np.asarray(cos, dtype=float))
    sin = np.atleast_2d(np.asarray(sin, dtype=float)) if len(sin) else np.zeros((0, 3))
    if sin.shape[0] == cos.shape[0] - 1:
        sin = np.vstack([np.zeros((1, 3)), sin])
    M = max(cos.shape[0], sin.shape[0]) - 1 if modes is None else int(modes)
    C = np.zeros((M + 1, 3))
    S = np.zeros((M + 1, 3))
    C[:min(M + 1, cos.shape[0])] = cos[:M + 1]
    S[:min(M + 1, sin.shape[0])] = sin[:M + 1]
    S[0] = 0.0

    n = _default_samples(M)
    probe = ClosedCurve(C, S, period, 1.0, 4 * n)
    sp = probe.speed(probe.alpha)
    scale = max(1.0, float(np.abs(C).max()), float(np.abs(S).max()))
    if M < 1 or sp.min() < ZERO_SPEED_TOL * scale:
        raise ZeroSpeed("curve speed vanishes on the sample grid")

    # trapezoid rule is spectrally accurate for periodic integrands: refine
    # until two successive resolutions agree
    m = n
    prev = _trapezoid_length(C, S, period, m)
    for _ in range(8):
        m *= 2
        cur = _trapezoid_length(C, S, period, m)
        if abs(cur - prev) <= 1e-13 * cur:
            break
        prev = cur
    return ClosedCurve(C, S, period, cur, sample_count or n)


def load_curve(path) -> ClosedCurve:
    data = json.loads(Path(path).read_text())
    return make_fourier_curve(data)


def circle(radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> ClosedCurve:
    """Arc-length parametrized circle in the xy-plane."""
    L = 2 * np.pi * radius
    cos = np.zeros((2, 3))
    sin = np.zeros((2, 3))
    cos[0] = center
    cos[1, 0] = radius
    sin[1, 1] = radius
    return ClosedCurve(cos, sin, L, L, 256, {"name": "circle"})


def trefoil(sample_count: int | None = None) -> ClosedCurve:
    """Trefoil ``((2 + cos 3t) cos 2t, (2 + cos 3t) sin 2t, sin 3t)``, period 2 pi."""
    cos = np.zeros((6, 3))
    sin = np.zeros((6, 3))
    cos[2, 0] = 2.0
    cos[5, 0] = 0.5
    cos[1, 0] = 0.5
    sin[2, 1] = 2.0
    sin[5, 1] = 0.5
    sin[1, 1] = -0.5
    sin[3, 2] = 1.0
    c = make_fourier_curve((cos, sin), 5, sample_count=sample_count)
    c.meta["name"] = "trefoil"
    return c


# ---------------------------------------------------------------------------
# arc length
# ---------------------------------------------------------------------------

def _arclength_function(curve: ClosedCurve, nq: int):
    """Speed series and the cumulative arc length ``S(t)`` in closed form."""
    t = np.arange(nq) * curve.period / nq
    sig = PeriodicSeries.from_samples(curve.speed(t), curve.period)
    k = np.arange(1, sig.modes + 1) * sig.omega

    def S(tt):
        ph = np.multiply.outer(tt, k)
        return sig.a0 * tt + np.sin(ph) @ (sig.a / k) - (np.cos(ph) - 1.0) @ (sig.b / k)

    return sig, S


def arclength_reparam(curve: ClosedCurve, n: int = 1024, sample_count: int | None = None,
                      tol: float = REPARAM_TOL) -> ClosedCurve:
    """Reparametrize by arc length.

    The cumulative arc length ``S(t)`` is known in closed form from the
    Fourier series of the speed; ``S(t_j) = j L / n`` is inverted by Newton
    iteration and the resampled points are projected back onto a Fourier
    basis with ``n // 2 - 1`` modes.

    Raises
    ------
    ConvergenceFailure
        If the Newton inversion stalls or the output speed deviates from 1
        by more than ``tol``.
    """
    if n % 2:
        n += 1
    nq = max(4 * n, 8 * curve.modes)
    sig, S = _arclength_function(curve, nq)
    L = sig.integral()
    s = np.arange(n) * L / n
    t = s / sig.a0
    for _ in range(60):
        step = (S(t) - s) / sig(t)
        t = t - step
        if np.max(np.abs(step)) < 1e-15 * curve.period:
            break
    else:
        raise ConvergenceFailure("arc-length inversion did not converge")

    pts = curve(t)
    c = np.fft.rfft(pts, axis=0) / n
    M = n // 2 - 1
    cos = np.zeros((M + 1, 3))
    sin = np.zeros((M + 1, 3))
    cos[0] = c[0].real
    cos[1:] = 2 * c[1:M + 1].real
    sin[1:] = -2 * c[1:M + 1].imag
    # trailing modes below roundoff carry no information
    amp = np.abs(cos).max(axis=1) + np.abs(sin).max(axis=1)
    keep = np.nonzero(amp > 1e-15 * amp.max())[0]
    M = max(int(keep.max()), 1)
    cos, sin = cos[:M + 1], sin[:M + 1]
    out = ClosedCurve(cos, sin, L, L, sample_count or _default_samples(M), dict(curve.meta))
    check = np.arange(n) * L / n
    dev = float(np.max(np.abs(out.speed(check) - 1.0)))
    out.meta["speed_defect"] = dev
    if dev > tol:
        raise ConvergenceFailure(f"reparametrized speed deviates from 1 by {dev:.2e}; increase n")
    return out


# ---------------------------------------------------------------------------
# scalar geometry
# ---------------------------------------------------------------------------

def curvature_torsion(curve: ClosedCurve, alpha):
    """Curvature and torsion at parameter value(s) ``alpha``."""
    return curve.curvature(alpha), curve.torsion(alpha)


def total_torsion(curve: ClosedCurve, n: int | None = None) -> float:
    """``int tau ds`` by the periodic trapezoid rule (``n`` nodes)."""
    n = n or curve.sample_count
    t = np.arange(n) * curve.period / n
    return float(np.mean(curve.torsion(t) * curve.speed(t)) * curve.period)


def total_integral(curve: ClosedCurve, values_fn, n: int | None = None) -> float:
    """``int f ds`` for ``f = values_fn(t)`` by the periodic trapezoid rule."""
    n = n or curve.sample_count
    t = np.arange(n) * curve.period / n
    return float(np.mean(values_fn(t) * curve.speed(t)) * curve.period)


@dataclass
class AdmissibilityReport:
    eps: float
    kappa_min: float
    kappa_max: float
    min_separation: float
    total_torsion: float
    nearest_multiple: int
    torsion_gap: float
    curvature_positive: bool
    chart_nondegenerate: bool
    embedded: bool
    torsion_elliptic: bool

    @property
    def geometric_ok(self) -> bool:
        return self.curvature_positive and self.chart_nondegenerate and self.embedded

    @property
    def ok(self) -> bool:
        return self.geometric_ok and self.torsion_elliptic

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["geometric_ok"] = self.geometric_ok
        d["ok"] = self.ok
        return d


def check_admissible(curve: ClosedCurve, eps: float, n: int = 720) -> AdmissibilityReport:
    """Check the finitely many geometric hypotheses for a tube of thickness ``eps``.

    * curvature bounded away from 0;
    * ``eps * kappa_max < 1`` so the chart factor ``B`` stays positive;
    * points at arc distance at least ``pi * eps`` are more than ``2 eps``
      apart (embedded tube, sampled);
    * ``|int tau - n pi| > 1e-6`` for ``|n| <= 64``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = np.arange(n) * curve.period / n
    try:
        kap = curve.curvature(t)
        kmin, kmax = float(kap.min()), float(kap.max())
        T = total_torsion(curve)
    except FlatPoint:
        kmin, kmax, T = 0.0, np.inf, 0.0
    _, S = _arclength_function(curve, max(4 * n, 8 * curve.modes))
    arc = S(t)
    L = curve.length
    pts = curve(t)
    sep = np.inf
    for i in range(0, n, 128):
        d = np.linalg.norm(pts[i:i + 128, None, :] - pts[None, :, :], axis=-1)
        da = np.abs(arc[i:i + 128, None] - arc[None, :])
        da = np.minimum(da, L - da)
        mask = da >= np.pi * eps
        if mask.any():
            sep = min(sep, float(d[mask].min()))
    nn = int(np.clip(np.rint(T / np.pi), -ELLIPTIC_NMAX, ELLIPTIC_NMAX))
    gap = abs(T - nn * np.pi)
    return AdmissibilityReport(
        eps=float(eps), kappa_min=kmin, kappa_max=kmax, min_separation=float(sep),
        total_torsion=T, nearest_multiple=nn, torsion_gap=float(gap),
        curvature_positive=kmin > 0, chart_nondegenerate=eps * kmax < 1,
        embedded=bool(sep > 2 * eps), torsion_elliptic=bool(gap > ELLIPTIC_TOL))
