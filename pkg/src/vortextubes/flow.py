"""Dynamics of the normalized field ``X = h / h^alpha`` in a tube.

Since ``X^alpha = 1`` the flow time equals ``alpha`` and the first return to
the section ``{alpha = 0}`` happens exactly at ``s = length``, so the Poincaré
map is the time-``length`` flow.  In polar transverse coordinates

    r'     = B^2 psi_r / (eps^2 D),
    theta' = (tau + A psi_theta / (eps r)^2 + tau psi_alpha) / D,
    D      = 1 + psi_alpha + tau psi_theta.

The boundary ``r = 1`` is invariant (``psi_r = 0`` there); its circle map, its
rotation number, the conjugacy to a rotation and the normal torsion are
computed here.  Angles are always lifted (never wrapped) along trajectories.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from ._spectral import PeriodicSeries
from .chart import TubeChart
from .curves import ClosedCurve, arclength_reparam
from .errors import (LeftDomain, NoConvergence, NonPositiveDenominator, SmallDivisorBreakdown,
                     StepFailure)
from .grid import TubeScalarField
from .harmonic import HarmonicField, SpectralFields, _psi_fields

log = logging.getLogger(__name__)

R_MIN = 0.1
LEAVE_TOL = 1e-6
DIVISOR_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# geometry stand-in with constant curvature and torsion
# ---------------------------------------------------------------------------

class ModelChart:
    """Chart-like object with constant ``kappa`` and ``tau`` on a loop of
    length ``length``; paired with ``psi = 0`` it gives the rigid-rotation
    model ``X = (1, 0, tau)``."""

    def __init__(self, kappa: float, tau: float, length: float, eps: float):
        self.kappa0, self.tau0 = float(kappa), float(tau)
        self.length = float(length)
        self.eps = float(eps)

    def kappa(self, alpha, deriv: int = 0):
        return np.full(np.shape(alpha), self.kappa0 if deriv == 0 else 0.0)

    def tau(self, alpha, deriv: int = 0):
        return np.full(np.shape(alpha), self.tau0 if deriv == 0 else 0.0)


# ---------------------------------------------------------------------------
# the flow field
# ---------------------------------------------------------------------------

_BASIC = ("a", "th", "r", "q")
_SECOND = ("rr", "rth", "thth", "ar", "ath")


class FlowField:
    """Evaluator of ``X = h / h^alpha`` (immutable after construction).

    Parameters
    ----------
    chart : TubeChart or ModelChart
    harmonic : HarmonicField or None
        ``None`` means ``psi = 0``.
    check : bool
        Verify ``1 + psi_alpha + tau psi_theta > 0`` on the grid.
    """

    def __init__(self, chart, harmonic: HarmonicField | None = None, check: bool = True):
        self.chart = chart
        self.eps = chart.eps
        self.length = chart.length
        self.harmonic = harmonic
        self.zero = harmonic is None or harmonic.zero
        if not self.zero:
            g = harmonic.grid
            f, par = _psi_fields(g, harmonic.psi.values)
            self._basic = SpectralFields(g, {n: f[n] for n in _BASIC}, par)
            self._second = SpectralFields(g, {n: f[n] for n in _SECOND}, par)
            if check:
                den = 1.0 + f["a"] + g.curve3(g.tau) * f["th"]
                if den.min() <= 0:
                    raise NonPositiveDenominator(f"min(1 + psi_a + tau psi_th) = {den.min():.3g}")

    # -- psi data -------------------------------------------------------------
    def _derivs(self, alpha, r, theta, second=False):
        if self.zero:
            z = np.zeros(np.broadcast(r, theta).shape)
            names = _BASIC + (_SECOND if second else ())
            return {n: z for n in names}
        d = self._basic.evaluate(alpha, r, theta)
        if second:
            d.update(self._second.evaluate(alpha, r, theta))
        return d

    def rhs(self, alpha: float, r, theta, jacobian: bool = False):
        """``(r', theta')`` at points sharing ``alpha``; with ``jacobian=True``
        also ``d(r', theta') / d(r, theta)`` of shape ``(2, 2, n)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        d = self._derivs(alpha, r, theta, second=jacobian)
        eps = self.eps
        kap = float(self.chart.kappa(alpha))
        tau = float(self.chart.tau(alpha))
        c, s = np.cos(theta), np.sin(theta)
        B = 1.0 - eps * kap * r * c
        A = B ** 2 + (eps * tau * r) ** 2
        D = 1.0 + d["a"] + tau * d["th"]
        if np.any(D <= 0):
            raise NonPositiveDenominator("h^alpha <= 0 along the flow")
        Q = d["q"] / (eps ** 2 * r)  # psi_theta / (eps r)^2
        num_t = tau + A * Q + tau * d["a"]
        f1 = B ** 2 * d["r"] / (eps ** 2 * D)
        f2 = num_t / D
        if not jacobian:
            return f1, f2
        B_r, B_t = -eps * kap * c, eps * kap * r * s
        A_r = 2 * B * B_r + 2 * (eps * tau) ** 2 * r
        A_t = 2 * B * B_t
        D_r = d["ar"] + tau * d["rth"]
        D_t = d["ath"] + tau * d["thth"]
        Q_r = (d["rth"] - 2 * d["q"]) / (eps ** 2 * r ** 2)
        Q_t = d["thth"] / (eps * r) ** 2
        N_r = A_r * Q + A * Q_r + tau * d["ar"]
        N_t = A_t * Q + A * Q_t + tau * d["ath"]
        J = np.empty((2, 2) + r.shape)
        J[0, 0] = (2 * B * B_r * d["r"] + B ** 2 * d["rr"]) / (eps ** 2 * D) - f1 * D_r / D
        J[0, 1] = (2 * B * B_t * d["r"] + B ** 2 * d["rth"]) / (eps ** 2 * D) - f1 * D_t / D
        J[1, 0] = N_r / D - f2 * D_r / D
        J[1, 1] = N_t / D - f2 * D_t / D
        return f1, f2, J

    def cartesian(self, alpha: float, y):
        """``(1, y')`` in transverse Cartesian coordinates (valid at the axis)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        r = np.hypot(y[:, 0], y[:, 1])
        th = np.arctan2(y[:, 1], y[:, 0])
        if self.zero:
            tau = float(self.chart.tau(alpha))
            return np.stack([-tau * y[:, 1], tau * y[:, 0]], -1)
        fv = self.harmonic.value(alpha, r, th, polar=False)
        return fv.v_y / fv.v_alpha[:, None]

    def density(self, r, theta):
        """``G(r, theta) = (1 + psi_alpha + tau psi_theta) / B`` at ``alpha = 0``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        d = self._derivs(0.0, r, theta)
        kap, tau = float(self.chart.kappa(0.0)), float(self.chart.tau(0.0))
        B = 1.0 - self.eps * kap * r * np.cos(theta)
        return (1.0 + d["a"] + tau * d["th"]) / B


def field_X(chart, psi=None, check: bool = True) -> FlowField:
    """Flow-ready field from a chart and ``psi`` (``HarmonicField``,
    ``TubeScalarField`` or ``None`` for ``psi = 0``)."""
    if isinstance(psi, TubeScalarField):
        psi = HarmonicField(psi.grid, psi)
    return FlowField(chart, psi, check)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryState:
    """Points ``(alpha, r, theta)`` after a flow; ``theta`` is lifted.

    ``monodromy`` (shape ``(2, 2, n)``) is ``d(r, theta)(s) / d(r0, theta0)``
    when variational equations were integrated.
    """

    alpha: float
    r: np.ndarray
    theta: np.ndarray
    monodromy: np.ndarray | None = None
    solution: object = None
    nfev: int = 0

    @property
    def y(self):
        return np.stack([self.r * np.cos(self.theta), self.r * np.sin(self.theta)], -1)


def integrate(field: FlowField, r0, theta0, s_end: float, tol: float = 1e-10, s0: float = 0.0,
              variational: bool = False, boundary: bool = False, dense: bool = False,
              t_eval=None, r_min: float = R_MIN) -> TrajectoryState:
    """Integrate ``X`` from ``alpha = s0`` to ``s_end`` (DOP853, ``rtol = atol = tol``).

    Parameters
    ----------
    r0, theta0 : array_like
        Start points (integrated together).
    variational : bool
        Also integrate ``M' = DX M``, ``M(s0) = I``.
    boundary : bool
        Pin ``r = 1`` (the invariant boundary circle); only ``theta`` moves.

    Raises
    ------
    LeftDomain
        If ``r`` exceeds ``1 + 1e-6``.
    StepFailure
        If the integrator fails.
    """
    r0, theta0 = np.broadcast_arrays(np.atleast_1d(np.asarray(r0, dtype=float)),
                                     np.atleast_1d(np.asarray(theta0, dtype=float)))
    r0 = r0.copy()
    if boundary:
        r0[:] = 1.0
    if np.any(r0 < r_min):
        raise ValueError(f"polar integration needs r0 >= {r_min}")
    if np.any(r0 > 1.0 + LEAVE_TOL):
        raise LeftDomain("start point outside the tube")
    n = r0.size

    def fun(s, u):
        r, th = u[:n], u[n:2 * n]
        if variational:
            f1, f2, J = field.rhs(s, r, th, jacobian=True)
        else:
            f1, f2 = field.rhs(s, r, th)
        if boundary:
            f1 = np.zeros_like(f1)
        out = [f1, f2]
        if variational:
            M = u[2 * n:].reshape(2, 2, n)
            out.append(np.einsum("ijn,jkn->ikn", J, M).ravel())
        return np.concatenate(out)

    u0 = [r0, theta0]
    if variational:
        u0.append(np.broadcast_to(np.eye(2)[:, :, None], (2, 2, n)).ravel())
    u0 = np.concatenate(u0)
    if s_end == s0:
        M = np.broadcast_to(np.eye(2)[:, :, None], (2, 2, n)).copy() if variational else None
        return TrajectoryState(s0, r0, theta0.copy(), M)
    sol = solve_ivp(fun, (s0, s_end), u0, method="DOP853", rtol=tol, atol=tol,
                    dense_output=dense, t_eval=t_eval)
    if sol.status < 0:
        raise StepFailure(sol.message)
    uf = sol.y[:, -1]
    r, th = uf[:n], uf[n:2 * n]
    rmax = float(np.max(sol.y[:n]))
    if rmax > 1.0 + LEAVE_TOL:
        raise LeftDomain(f"trajectory reached r = {rmax:.8f}")
    M = uf[2 * n:].reshape(2, 2, n) if variational else None
    return TrajectoryState(float(s_end), r, th, M, sol, sol.nfev)


def poincare_map(field: FlowField, r0, theta0, tol: float = 1e-10, variational: bool = False):
    """``Pi(r0, theta0)``: the time-``length`` flow.  Returns ``(r, theta)`` or,
    with ``variational=True``, ``(r, theta, DPi)``."""
    st = integrate(field, r0, theta0, field.length, tol=tol, variational=variational,
                   boundary=False)
    if variational:
        return st.r, st.theta, st.monodromy
    return st.r, st.theta


def poincare_orbits(field: FlowField, r0, theta0, n_iter: int, tol: float = 1e-10):
    """Iterate the Poincaré map; returns arrays of shape ``(n_iter + 1, n_seeds)``."""
    r = np.atleast_1d(np.asarray(r0, dtype=float)).copy()
    th = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    R, T = [r.copy()], [th.copy()]
    for _ in range(n_iter):
        r, th = poincare_map(field, r, th, tol)
        R.append(r.copy())
        T.append(th.copy())
    return np.array(R), np.array(T)


# ---------------------------------------------------------------------------
# the boundary circle map
# ---------------------------------------------------------------------------

class CircleMap:
    """Lift ``P(theta) = theta + d(theta)`` of a circle map with ``d`` a
    trigonometric polynomial.

    Parameters
    ----------
    displacement : PeriodicSeries
        ``d`` (period ``2 pi``).
    """

    def __init__(self, displacement: PeriodicSeries):
        self.d = displacement

    @classmethod
    def from_samples(cls, values):
        """From lifted images ``P(2 pi j / n)``, ``j = 0..n-1``."""
        values = np.asarray(values, dtype=float)
        n = values.size
        th = 2 * np.pi * np.arange(n) / n
        return cls(PeriodicSeries.from_samples(values - th, 2 * np.pi))

    @classmethod
    def rotation(cls, omega: float):
        return cls(PeriodicSeries(omega, [], [], 2 * np.pi))

    def __call__(self, theta, deriv: int = 0):
        theta = np.asarray(theta, dtype=float)
        if deriv == 0:
            return theta + self.d(theta)
        out = self.d(theta, deriv)
        return out + 1.0 if deriv == 1 else out

    def is_rotation(self, tol: float = 1e-13) -> bool:
        return bool(np.all(np.abs(self.d.a) <= tol) and np.all(np.abs(self.d.b) <= tol))

    @property
    def tail(self) -> float:
        return self.d.tail(4)


def boundary_map(field: FlowField, n_samples: int = 128, tol: float = 1e-11) -> CircleMap:
    """Circle map of ``Pi`` restricted to ``r = 1`` from ``n_samples`` trajectories."""
    th0 = 2 * np.pi * np.arange(n_samples) / n_samples
    st = integrate(field, 1.0, th0, field.length, tol=tol, boundary=True)
    return CircleMap.from_samples(st.theta)


@dataclass
class RotationEstimate:
    omega: float
    error: float
    method: str
    n_iter: int


def _bump(t):
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (ti * (1.0 - ti)))
    return out


def _birkhoff(increments, weighted):
    n = increments.size
    if not weighted:
        return float(np.mean(increments))
    w = _bump((np.arange(n) + 0.5) / n)
    return float(np.sum(w * increments) / np.sum(w))


def rotation_number(circle_map, theta0: float = 0.0, n_iter: int = 10_000,
                    method: str = "weighted-birkhoff") -> RotationEstimate:
    """Rotation number of a lifted circle map, ``lim (P^n(theta0) - theta0) / n``.

    ``method`` is ``"weighted-birkhoff"`` (bump-weighted averages of the
    increments) or ``"birkhoff-plain"``.  The error estimate is the difference
    between the estimates from ``n_iter`` and ``n_iter / 2`` iterates.
    """
    if n_iter < 100:
        raise ValueError("n_iter must be at least 100")
    if method not in ("weighted-birkhoff", "birkhoff-plain"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(circle_map, FlowField):
        circle_map = boundary_map(circle_map)
    th = np.empty(n_iter + 1)
    th[0] = theta0
    for i in range(n_iter):
        th[i + 1] = circle_map(th[i])
    inc = np.diff(th)
    weighted = method == "weighted-birkhoff"
    full = _birkhoff(inc, weighted)
    half = _birkhoff(inc[: n_iter // 2], weighted)
    return RotationEstimate(full, abs(full - half), method, n_iter)


# ---------------------------------------------------------------------------
# conjugacy to a rotation
# ---------------------------------------------------------------------------

@dataclass
class Conjugacy:
    """``Theta(v) = v + H(v)`` with ``P(Theta(v)) = Theta(v + omega)``.

    ``H_hat[k]`` (``k = 0..K``) are complex coefficients of
    ``H = sum_k H_hat[k] e^{ikv}`` for ``k >= 0`` (real ``H``).
    """

    omega: float
    H_hat: np.ndarray
    defect: float
    iterations: int
    omega_shift: float = 0.0

    def H(self, v, deriv: int = 0):
        v = np.asarray(v, dtype=float)
        k = np.arange(self.H_hat.size)
        e = np.exp(1j * np.multiply.outer(v, k)) * (1j * k) ** deriv
        coef = self.H_hat * np.where(k == 0, 1.0, 2.0)
        return (e @ coef).real

    def Theta(self, v, deriv: int = 0):
        out = self.H(v, deriv)
        if deriv == 0:
            return np.asarray(v) + out
        return out + 1.0 if deriv == 1 else out

    @property
    def sin_coefficient(self) -> float:
        """Coefficient of ``sin v`` in ``H``."""
        return float(-2.0 * self.H_hat[1].imag) if self.H_hat.size > 1 else 0.0

    @property
    def cos_coefficient(self) -> float:
        return float(2.0 * self.H_hat[1].real) if self.H_hat.size > 1 else 0.0


def conjugacy(circle_map: CircleMap, omega: float, K_modes: int = 256, tol: float = 1e-10,
              maxiter: int = 40, divisor_floor: float = DIVISOR_FLOOR,
              update_omega: bool = True) -> Conjugacy:
    """Newton iteration for ``Theta = id + H`` conjugating ``P`` to the
    rotation by ``omega``.

    Each step solves ``W(v + omega) - W(v) + d_omega = E(v) / Theta'(v + omega)``
    in Fourier space (``W_k = R_k / (e^{ik omega} - 1)``) and updates
    ``H += Theta' W``; the mean of ``H`` is kept at zero.  With
    ``update_omega`` the frequency absorbs the mean of the right-hand side.

    Raises
    ------
    SmallDivisorBreakdown
        If ``|e^{ik omega} - 1| < divisor_floor`` for some ``1 <= k <= K_modes``.
    NoConvergence
    """
    K = int(K_modes)
    if circle_map.is_rotation():
        return Conjugacy(float(circle_map.d.a0), np.zeros(K + 1, complex), 0.0, 0,
                         float(circle_map.d.a0) - omega)
    k = np.arange(1, K + 1)
    div = np.exp(1j * k * omega) - 1.0
    if np.min(np.abs(div)) < divisor_floor:
        kb = int(k[np.argmin(np.abs(div))])
        raise SmallDivisorBreakdown(f"|exp(i k omega) - 1| < {divisor_floor:g} at k = {kb}")
    n = 2 * K + 2
    v = 2 * np.pi * np.arange(n) / n
    kk = np.fft.rfftfreq(n, 1.0 / n)
    H = np.zeros(n)
    om0 = omega

    def shift(f, a):
        fh = np.fft.rfft(f)
        fh[-1] = 0.0
        return np.fft.irfft(fh * np.exp(1j * kk * a), n)

    def deriv(f):
        fh = np.fft.rfft(f)
        fh[-1] = 0.0
        return np.fft.irfft(fh * 1j * kk, n)

    err = np.inf
    for it in range(1, maxiter + 1):
        E = circle_map(v + H) - (v + omega + shift(H, omega))
        err = float(np.max(np.abs(E)))
        log.debug("conjugacy step %d: defect %.3e", it, err)
        if err < tol:
            break
        dTh = 1.0 + deriv(H)
        if np.min(dTh) <= 0:
            raise NoConvergence("Theta lost monotonicity during Newton iteration")
        R = E / shift(dTh, omega)
        d_om = float(np.mean(R)) if update_omega else 0.0
        Rh = np.fft.rfft(R - d_om)
        Rh[-1] = 0.0
        Wh = np.zeros_like(Rh)
        Wh[1:K + 1] = Rh[1:K + 1] / (np.exp(1j * kk[1:K + 1] * omega) - 1.0)
        W = np.fft.irfft(Wh, n)
        dH = dTh * W
        H = H + dH - np.mean(H + dH)
        omega += d_om
    else:
        raise NoConvergence(f"conjugacy defect {err:.2e} after {maxiter} steps")
    Hh = np.fft.rfft(H)[:K + 1] / n
    return Conjugacy(float(omega), Hh, err, it, float(omega - om0))


# ---------------------------------------------------------------------------
# invariant measure and normal torsion
# ---------------------------------------------------------------------------

def measure_density(field: FlowField, r, theta):
    """Density ``G`` of the invariant area form ``G r dr dtheta`` on the section."""
    return field.density(r, theta)


@dataclass
class MeasureReport:
    max_defect: float
    defects: np.ndarray
    points: int


def measure_preservation_check(field: FlowField, r, theta, tol: float = 1e-10) -> MeasureReport:
    """Pointwise defect ``|det D_y Pi(p) G(Pi(p)) - G(p)|`` (``y``: transverse
    Cartesian coordinates, so ``det D_y Pi = r_Pi det D_(r,theta) Pi / r``)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    rP, thP, M = poincare_map(field, r, theta, tol, variational=True)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    det_y = det * rP / r
    dfc = np.abs(det_y * field.density(rP, thP) - field.density(r, theta))
    return MeasureReport(float(dfc.max()), dfc, r.size)


def normal_torsion(field: FlowField, conj: Conjugacy, n_nodes: int = 128, tol: float = 1e-11) -> float:
    """Normal torsion of the Poincaré map on the boundary circle,

    ``int_0^{2pi} d_r Pi_theta(1, Theta(v)) / (Theta'(v + omega) Theta'(v) G(1, Theta(v))) dv``,

    by the trapezoid rule on ``n_nodes`` points; ``d_r Pi_theta`` comes from
    the variational equations along the boundary trajectories.
    """
    v = 2 * np.pi * np.arange(n_nodes) / n_nodes
    th0 = conj.Theta(v)
    st = integrate(field, 1.0, th0, field.length, tol=tol, variational=True, boundary=True)
    dr_pi_th = st.monodromy[1, 0]
    G = field.density(np.ones_like(th0), th0)
    den = conj.Theta(v + conj.omega, 1) * conj.Theta(v, 1) * G
    return float(np.sum(dr_pi_th / den) * 2 * np.pi / n_nodes)


# ---------------------------------------------------------------------------
# Diophantine quality
# ---------------------------------------------------------------------------

@dataclass
class DiophantineQuality:
    """``C_est = min_{1 <= k <= K} k^(1+nu) |omega/2pi - p/k|`` and its minimizer."""

    C: float
    nu: float
    p: int
    k: int
    K_max: int

    def to_dict(self):
        return dict(C=self.C, nu=self.nu, k_worst=self.k, p_worst=self.p, K_max=self.K_max)


def diophantine_quality(omega: float, nu: float = 1.5, K_max: int = 10_000) -> DiophantineQuality:
    if nu <= 1:
        raise ValueError("nu must exceed 1")
    x = omega / (2 * np.pi)
    k = np.arange(1, int(K_max) + 1, dtype=float)
    p = np.round(k * x)
    val = k ** (1 + nu) * np.abs(x - p / k)
    i = int(np.argmin(val))
    return DiophantineQuality(float(val[i]), float(nu), int(p[i]), int(k[i]), int(K_max))


def continued_fraction(x: float, n_terms: int = 30):
    """Partial quotients and convergents ``(p, q)`` of ``x`` (exact arithmetic
    on the binary value of ``x``)."""
    f = Fraction(x)
    terms, conv = [], []
    p0, q0, p1, q1 = 1, 0, int(np.floor(f)), 1
    a = p1
    terms.append(a)
    conv.append((p1, q1))
    rest = f - a
    while rest and len(terms) < n_terms:
        f = 1 / rest
        a = int(np.floor(f))
        rest = f - a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        terms.append(a)
        conv.append((p1, q1))
    return terms, conv


# ---------------------------------------------------------------------------
# full analysis of the boundary circle
# ---------------------------------------------------------------------------

@dataclass
class CircleMapAnalysis:
    omega: float
    omega_error: float
    H_hat: np.ndarray
    normal_torsion: float
    dioph: DiophantineQuality
    iterate_count: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def theta_sin_coefficient(self) -> float:
        return float(-2.0 * self.H_hat[1].imag) if self.H_hat.size > 1 else 0.0

    def to_dict(self):
        return dict(omega=self.omega, omega_error=self.omega_error,
                    theta_sin_coefficient=self.theta_sin_coefficient,
                    normal_torsion=self.normal_torsion, dioph=self.dioph.to_dict(),
                    iterate_count=self.iterate_count, diagnostics=self.diagnostics)


def analyze_boundary(field: FlowField, n_iter: int = 10_000, n_samples: int = 128, K_modes: int = 64,
                     n_nodes: int = 128, tol: float = 1e-11, nu: float = 1.5) -> CircleMapAnalysis:
    """Rotation number, conjugacy, normal torsion and Diophantine quality of
    the boundary circle map."""
    cmap = boundary_map(field, n_samples, tol)
    rot = rotation_number(cmap, 0.0, n_iter, "weighted-birkhoff")
    conj = conjugacy(cmap, rot.omega, K_modes=K_modes, tol=1e-12)
    ntor = normal_torsion(field, conj, n_nodes, tol)
    dq = diophantine_quality(conj.omega, nu)
    diag = dict(map_tail=cmap.tail, conjugacy_defect=conj.defect, conjugacy_iterations=conj.iterations,
                omega_shift=conj.omega_shift, boundary_samples=n_samples, torsion_nodes=n_nodes)
    return CircleMapAnalysis(rot.omega, rot.error, conj.H_hat, ntor, dq, n_iter, diag)


# ---------------------------------------------------------------------------
# core monodromy
# ---------------------------------------------------------------------------

@dataclass
class CoreMonodromy:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    T: float
    elliptic: bool

    def to_dict(self):
        return dict(T=self.T, eigenvalues=[[float(z.real), float(z.imag)] for z in self.eigenvalues],
                    elliptic=self.elliptic)


def monodromy_core(curve: ClosedCurve, tol: float = 1e-13, elliptic_tol: float = 1e-9) -> CoreMonodromy:
    """Monodromy of the core orbit ``y = 0`` of ``d_alpha + tau (y1 d_2 - y2 d_1)``.

    The variational system is integrated numerically over one period; the
    ellipticity verdict asks the nontrivial eigenvalues to be non-real.
    """
    if not curve.is_arclength:
        curve = arclength_reparam(curve)
    ts = curve.tau_series

    def fun(s, u):
        t = float(ts(s))
        M = u.reshape(3, 3)
        Adot = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -t], [0.0, t, 0.0]])
        return (Adot @ M).ravel()

    sol = solve_ivp(fun, (0.0, curve.length), np.eye(3).ravel(), method="DOP853", rtol=tol, atol=tol)
    if sol.status < 0:
        raise StepFailure(sol.message)
    M = sol.y[:, -1].reshape(3, 3)
    T = float(np.arctan2(M[2, 1], M[1, 1]))
    # lift T using the closed-form total torsion
    total = ts.integral()
    T += 2 * np.pi * np.round((total - T) / (2 * np.pi))
    ev = np.linalg.eigvals(M[1:, 1:])
    ev = ev[np.argsort(-ev.imag)]
    eig = np.concatenate([[1.0 + 0j], ev])
    elliptic = bool(abs(np.sin(T)) > elliptic_tol)
    return CoreMonodromy(M, eig, T, elliptic)


# ---------------------------------------------------------------------------
# closed-form trajectory expansion
# ---------------------------------------------------------------------------

def _primitive(series: PeriodicSeries, s):
    """``int_0^s`` of a periodic series."""
    s = np.asarray(s, dtype=float)
    k = np.arange(1, series.modes + 1) * series.omega
    ph = np.multiply.outer(s, k)
    return (series.a0 * s + np.sin(ph) @ (series.a / k) + (1.0 - np.cos(ph)) @ (series.b / k))


def trajectory_asymptotic(curve, eps: float, s, r0: float, theta0: float):
    """Second-order expansion ``theta = theta0_(s) + eps theta1 + eps^2 theta2``
    and first-order ``r = r0 + eps r1`` of the trajectory through
    ``(0, r0, theta0)``.

    Parameters
    ----------
    curve : ClosedCurve or TubeChart
    s : array_like
        Times in ``[0, length]``.

    Returns
    -------
    r, theta : ndarray
    """
    if isinstance(curve, TubeChart):
        curve = curve.curve
    if not curve.is_arclength:
        curve = arclength_reparam(curve)
    s = np.asarray(s, dtype=float)
    ks, ts = curve.kappa_series, curve.tau_series
    a = curve.alpha
    k2t = PeriodicSeries.from_samples(ks(a) ** 2 * ts(a), curve.length)
    kap_s, kap_0 = ks(s), float(ks(0.0))
    th0s = theta0 + _primitive(ts, s)
    th1 = (r0 ** 2 - 3) / (8 * r0) * (kap_s * np.sin(th0s) - kap_0 * np.sin(theta0))
    r2 = r0 ** 2
    th2 = ((12 - 5 * r2) / 32 * _primitive(k2t, s)
           + 3 * (r0 ** 4 + 2 * r2 - 3) * kap_s * kap_0 / (64 * r2) * np.cos(theta0) * np.sin(th0s)
           - (3 - r2) ** 2 * kap_s * kap_0 / (64 * r2) * np.sin(theta0) * np.cos(th0s)
           + (27 - 50 * r2 + 25 * r0 ** 4) * kap_s ** 2 / (384 * r2) * np.sin(2 * th0s)
           + (27 + 14 * r2 - 31 * r0 ** 4) * kap_0 ** 2 / (384 * r2) * np.sin(2 * theta0))
    r1 = 3 * (1 - r2) / 8 * (kap_s * np.cos(th0s) - kap_0 * np.cos(theta0))
    return r0 + eps * r1, th0s + eps * th1 + eps ** 2 * th2
