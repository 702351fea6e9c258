"""The harmonic field ``h = h0 + grad psi`` of a thin tube, its closed-form
asymptotic correctors, and the local Beltrami model field.

Vector fields are given by contravariant components ``(v_alpha, v_r, v_theta)``
with respect to ``(d_alpha, d_r, d_theta)``, or near the axis by the smooth
transverse Cartesian components ``v_y = d/ds (r cos theta, r sin theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import TubeChart
from .errors import AxisEvaluation, LambdaTooLarge
from .grid import TubeGrid, TubeScalarField, fft_field

AXIS_RADIUS = 0.05


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def h0_eval(chart: TubeChart, alpha, r, theta):
    """``h0 = B^-2 (d_alpha + tau d_theta)`` as ``(v_alpha, v_r, v_theta)``."""
    B = chart.B(alpha, r, theta)
    tau = chart.tau(alpha)
    return 1.0 / B ** 2, np.zeros_like(B), tau / B ** 2


def phi0_eval(chart: TubeChart, alpha, r, theta):
    """Leading transverse corrector ``eps^3 (r^3 - 3r)/8 (tau kappa sin - kappa' cos)``."""
    k, t, dk = chart.kappa(alpha), chart.tau(alpha), chart.kappa(alpha, 1)
    return chart.eps ** 3 * (r ** 3 - 3 * r) / 8 * (t * k * np.sin(theta) - dk * np.cos(theta))


def phi1_eval(chart: TubeChart, alpha, r, theta):
    """Second corrector ``13 eps^4 (r^4 - 2 r^2)/96 (tau kappa^2 sin 2theta - kappa kappa' cos 2theta)``."""
    k, t, dk = chart.kappa(alpha), chart.tau(alpha), chart.kappa(alpha, 1)
    return (13 * chart.eps ** 4 * (r ** 4 - 2 * r ** 2) / 96
            * (t * k ** 2 * np.sin(2 * theta) - k * dk * np.cos(2 * theta)))


def _phi_derivatives(grid: TubeGrid):
    """Grid values of ``(d_r phi0, d_theta phi0, d_theta phi1)``."""
    eps = grid.eps
    R, T = grid.R3, grid.T3
    k, t, dk = grid.curve3(grid.kap), grid.curve3(grid.tau), grid.curve3(grid.dkap)
    S = t * k * np.sin(T) - dk * np.cos(T)
    St = t * k * np.cos(T) + dk * np.sin(T)
    p0r = eps ** 3 * (3 * R ** 2 - 3) / 8 * S
    p0t = eps ** 3 * (R ** 3 - 3 * R) / 8 * St
    p1t = 13 * eps ** 4 * (R ** 4 - 2 * R ** 2) / 48 * (t * k ** 2 * np.cos(2 * T) + k * dk * np.sin(2 * T))
    shape = grid.shape
    return (np.broadcast_to(p0r, shape), np.broadcast_to(p0t, shape), np.broadcast_to(p1t, shape))


# ---------------------------------------------------------------------------
# evaluation machinery
# ---------------------------------------------------------------------------

class SpectralFields:
    """Named grid fields stored as ``(alpha, theta)`` Fourier coefficients for
    fast evaluation at arbitrary points.  All points of one call share ``alpha``.

    ``parity`` is +1 for fields with ``f(-r, theta) = f(r, theta + pi)`` and
    -1 for radial derivatives (and for ``psi_theta / r``).
    """

    def __init__(self, grid: TubeGrid, fields: dict, parities: dict):
        self.grid = grid
        self.names = list(fields)
        self.parity = dict(parities)
        self._hat = np.stack([fft_field(fields[n]) for n in self.names])  # (F, k, r, m)
        self._cache_alpha = None
        self._cache = None

    def at_alpha(self, alpha: float):
        if self._cache_alpha != alpha:
            g = self.grid
            k = np.fft.fftfreq(g.n_alpha, 1.0 / g.n_alpha)
            ph = np.exp(2j * np.pi * k * alpha / g.length)
            ph[g.n_alpha // 2] = ph[g.n_alpha // 2].real  # cos-only Nyquist
            self._cache = np.tensordot(ph, self._hat, axes=(0, 1))  # (F, r, m)
            self._cache_alpha = alpha
        return self._cache

    def evaluate(self, alpha: float, r, theta, names=None):
        """Values of the requested fields at points ``(alpha, r_p, theta_p)``."""
        g = self.grid
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        coeffs = self.at_alpha(float(alpha))
        m = np.fft.fftfreq(g.n_theta, 1.0 / g.n_theta)
        nyq = g.n_theta // 2
        ph = np.exp(1j * np.multiply.outer(theta, m))
        ph[:, nyq] = np.cos(nyq * theta)
        Le = g.radial.interp_matrix(r, 0)
        Lo = g.radial.interp_matrix(r, 1)
        modd = (m.astype(int) % 2 == 1)
        out = {}
        for name in names or self.names:
            i = self.names.index(name)
            c = coeffs[i]
            odd = modd if self.parity[name] == 1 else ~modd
            vals = np.where(odd[None, :], Lo @ c, Le @ c)
            out[name] = np.sum(vals * ph, axis=1).real
        return out


@dataclass
class FieldValue:
    """Field sample at points sharing the arrays ``alpha, r, theta``.

    ``v_theta`` is ``None`` where polar components were not requested.
    """

    alpha: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    v_alpha: np.ndarray
    v_r: np.ndarray | None
    v_theta: np.ndarray | None
    v_y: np.ndarray  # (..., 2) transverse Cartesian components
    tag: str = "harmonic"


def _psi_fields(grid: TubeGrid, psi):
    u = psi
    ua = grid.d_alpha(u)
    ut = grid.d_theta(u)
    ur = grid.d_r(u)
    f = dict(psi=u, a=ua, th=ut, r=ur, q=ut / grid.R3,
             rr=grid.d_rr(u), rth=grid.d_theta(ur), thth=grid.d_theta(u, 2),
             ar=grid.d_alpha(ur), ath=grid.d_theta(ua))
    par = dict(psi=1, a=1, th=1, r=-1, q=-1, rr=1, rth=-1, thth=1, ar=-1, ath=1)
    return f, par


class HarmonicField:
    """``h = h0 + grad psi`` on a tube.

    Parameters
    ----------
    grid : TubeGrid
    psi : TubeScalarField or None
        Solution of the Neumann problem with the harmonic source; ``None``
        means ``psi = 0`` (e.g. circles).
    """

    tag = "harmonic"

    def __init__(self, grid: TubeGrid, psi: TubeScalarField | None = None):
        self.grid = grid
        self.chart = grid.chart
        self.eps = grid.eps
        vals = np.zeros(grid.shape) if psi is None else psi.values
        self.psi = psi
        f, par = _psi_fields(grid, vals)
        self.spectral = SpectralFields(grid, f, par)
        self.zero = psi is None or not np.any(vals)

    # -- psi derivatives at points --------------------------------------------
    def psi_derivatives(self, alpha: float, r, theta, names=("a", "th", "r", "q")):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.zero:
            z = np.zeros(np.broadcast(r, np.atleast_1d(theta)).shape)
            return {n: z for n in names}
        return self.spectral.evaluate(alpha, r, theta, names)

    def curve_data(self, alpha):
        ch = self.chart
        return ch.kappa(alpha), ch.tau(alpha)

    def value(self, alpha: float, r, theta, polar: bool = True) -> FieldValue:
        """Evaluate ``h`` at points sharing one ``alpha``.

        Raises
        ------
        AxisEvaluation
            If polar components are requested below the innermost radial node.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        r, theta = np.broadcast_arrays(r, theta)
        if polar and np.any(r < self.grid.r[-1]):
            raise AxisEvaluation("polar components requested inside the innermost node; use polar=False")
        d = self.psi_derivatives(alpha, r, theta)
        kap, tau = self.curve_data(alpha)
        eps = self.eps
        c, s = np.cos(theta), np.sin(theta)
        B = 1.0 - eps * kap * r * c
        A = B ** 2 + (eps * tau * r) ** 2
        va = (1.0 + d["a"] + tau * d["th"]) / B ** 2
        vr = d["r"] / eps ** 2
        # r * v_theta is smooth at the axis
        rvt = tau * r / B ** 2 + (A * d["q"] + eps ** 2 * r * tau * d["a"]) / (eps * B) ** 2
        vy = np.stack([c * vr - s * rvt, s * vr + c * rvt], axis=-1)
        vt = rvt / r if polar else None
        return FieldValue(np.full(r.shape, float(alpha)), r, theta, va, vr if polar else None, vt, vy, self.tag)

    def values(self, alpha, r, theta, polar: bool = False) -> FieldValue:
        """Evaluate at points with individual ``alpha`` values (grouped internally)."""
        alpha, r, theta = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (alpha, r, theta))
        alpha, r, theta = np.broadcast_arrays(alpha, r, theta)
        va = np.empty(r.shape)
        vy = np.empty(r.shape + (2,))
        vr = np.empty(r.shape) if polar else None
        vt = np.empty(r.shape) if polar else None
        for a in np.unique(alpha):
            idx = alpha == a
            fv = self.value(a, r[idx], theta[idx], polar)
            va[idx] = fv.v_alpha
            vy[idx] = fv.v_y
            if polar:
                vr[idx] = fv.v_r
                vt[idx] = fv.v_theta
        return FieldValue(alpha, r, theta, va, vr, vt, vy, self.tag)

    def cartesian(self, alpha, r, theta):
        """Euclidean vector of ``h`` at chart points (shape ``(..., 3)``)."""
        fv = self.values(alpha, r, theta, polar=False)
        return self.to_euclidean(fv)

    def to_euclidean(self, fv: FieldValue):
        ch = self.chart
        t, e1, e2 = ch.transverse_frame(fv.alpha)
        kap, tau = ch.kappa(fv.alpha), ch.tau(fv.alpha)
        y1 = fv.r * np.cos(fv.theta)
        y2 = fv.r * np.sin(fv.theta)
        B = 1.0 - ch.eps * kap * y1
        # d_alpha x = B t + eps tau (y2 e1 - y1 e2);  d_y x = eps (e1, e2)
        w1 = ch.eps * (fv.v_y[..., 0] + tau * y2 * fv.v_alpha)
        w2 = ch.eps * (fv.v_y[..., 1] - tau * y1 * fv.v_alpha)
        return (B * fv.v_alpha)[..., None] * t + w1[..., None] * e1 + w2[..., None] * e2

    def boundary_normal_max(self) -> float:
        """``max |h_r|`` over the boundary nodes of the grid."""
        g = self.grid
        ur = g.d_r(self.psi.values) if self.psi is not None else np.zeros(g.shape)
        return float(np.abs(ur[:, 0, :]).max() / self.eps ** 2)


def gradient_eval(chart: TubeChart, psi: TubeScalarField, alpha, r, theta):
    """``grad psi`` components ``((psi_a + tau psi_th)/B^2, psi_r/eps^2,
    (A psi_th + eps^2 r^2 tau psi_a)/(eps r B)^2)``."""
    hf = HarmonicField(psi.grid, psi)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < psi.grid.r[-1]):
        raise AxisEvaluation("polar gradient requested inside the innermost node")
    alpha, r, theta = np.broadcast_arrays(np.atleast_1d(alpha), r, np.atleast_1d(theta))
    out = np.empty(r.shape + (3,))
    for a in np.unique(alpha):
        idx = alpha == a
        d = hf.psi_derivatives(a, r[idx], theta[idx], ("a", "th", "r"))
        kap, tau = chart.kappa(a), chart.tau(a)
        rr, tt = r[idx], theta[idx]
        B = 1 - chart.eps * kap * rr * np.cos(tt)
        A = B ** 2 + (chart.eps * tau * rr) ** 2
        out[idx, 0] = (d["a"] + tau * d["th"]) / B ** 2
        out[idx, 1] = d["r"] / chart.eps ** 2
        out[idx, 2] = (A * d["th"] + chart.eps ** 2 * rr ** 2 * tau * d["a"]) / (chart.eps * rr * B) ** 2
    return out


def harmonic_eval(chart: TubeChart, psi: TubeScalarField | None, grid: TubeGrid | None = None) -> HarmonicField:
    if psi is None:
        grid = grid or TubeGrid(chart, 16, 4, 8)
        return HarmonicField(grid, None)
    return HarmonicField(psi.grid, psi)


def solve_harmonic(chart: TubeChart, n_alpha=256, n_r=16, n_theta=32, tol=1e-10) -> HarmonicField:
    """Build the grid, solve for ``psi`` and return ``h``."""
    from .neumann import NeumannSolver, harmonic_source

    grid = TubeGrid(chart, n_alpha, n_r, n_theta)
    rho = harmonic_source(grid)
    # planar curves of constant curvature give rho = 0 up to the rounding of
    # kappa' and tau; treat that as exactly zero (psi = 0)
    if rho.sup() <= 1e-12 * chart.eps:
        return HarmonicField(grid, None)
    psi = NeumannSolver(grid).solve(rho, tol=tol)
    return HarmonicField(grid, psi)


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def asymptotic_defects(psi: TubeScalarField):
    """``(||D_y psi - D_y phi0||_inf, ||psi_theta - d_theta(phi0 + phi1)||_inf)`` on the grid."""
    g = psi.grid
    p0r, p0t, p1t = _phi_derivatives(g)
    pr = g.d_r(psi.values)
    pt = g.d_theta(psi.values)
    dy = np.sqrt((pr - p0r) ** 2 + ((pt - p0t) / g.R3) ** 2).max()
    dth = np.abs(pt - p0t - p1t).max()
    return float(dy), float(dth)


def observed_orders(eps, defects):
    """``log2``-style orders ``log(d_i / d_{i+1}) / log(eps_i / eps_{i+1})``."""
    eps = np.asarray(eps, dtype=float)
    d = np.asarray(defects, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(d[:-1] / d[1:]) / np.log(eps[:-1] / eps[1:])


@dataclass
class ScalingReport:
    eps: list
    dy_defects: list
    dtheta_defects: list
    dy_orders: list = field(default_factory=list)
    dtheta_orders: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def asymptotic_check(psis) -> ScalingReport:
    """Defects of ``psi`` against ``phi0``/``phi1`` for solutions at several ``eps``
    on one curve (ordered by decreasing ``eps``)."""
    psis = sorted(psis, key=lambda p: -p.grid.eps)
    eps = [p.grid.eps for p in psis]
    dd = [asymptotic_defects(p) for p in psis]
    dy = [d[0] for d in dd]
    dt = [d[1] for d in dd]
    rep = ScalingReport(eps, dy, dt)
    if len(psis) > 1:
        rep.dy_orders = observed_orders(eps, dy).tolist()
        rep.dtheta_orders = observed_orders(eps, dt).tolist()
    return rep


# ---------------------------------------------------------------------------
# local Beltrami model
# ---------------------------------------------------------------------------

@dataclass
class ModelErrorBound:
    lam: float
    eps: float
    constant: float = 1.0

    @property
    def alpha_bound(self) -> float:
        return self.constant * self.eps * abs(self.lam)

    @property
    def y_bound(self) -> float:
        return self.constant * abs(self.lam)

    def to_dict(self):
        return dict(lam=self.lam, eps=self.eps, constant=self.constant,
                    alpha_bound=self.alpha_bound, y_bound=self.y_bound)


class ModelBeltrami(HarmonicField):
    """Local Beltrami field modeled by ``h``; carries the ``O(eps lambda)``
    (alpha) and ``O(lambda)`` (transverse) model-error record."""

    tag = "model-beltrami"

    def __init__(self, harmonic: HarmonicField, lam: float, constant: float = 1.0):
        self.__dict__.update(harmonic.__dict__)
        self.lam = float(lam)
        self.bound = ModelErrorBound(self.lam, self.eps, constant)


def model_beltrami(h: HarmonicField, lam: float, lambda_max: float = 1.0, constant: float = 1.0) -> ModelBeltrami:
    if abs(lam) > lambda_max:
        raise LambdaTooLarge(f"|lambda| = {abs(lam)} exceeds {lambda_max}")
    return ModelBeltrami(h, lam, constant)
