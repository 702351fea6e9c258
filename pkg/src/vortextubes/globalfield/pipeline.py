"""Multi-tube assembly: local fields -> one global Beltrami field -> per-tube
verification of the near-boundary dynamics.

The return map of a Cartesian field to the section ``{alpha = 0}`` of a tube
is computed once on a ``(r, theta)`` seed grid (Chebyshev x Fourier) and then
iterated through its interpolant, so long orbits are cheap.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import solve_ivp

from ..chart import TubeChart
from ..curves import ClosedCurve
from ..errors import LeftDomain, MisfitAboveTol, StepFailure, TubesOverlap
from ..flow import _birkhoff
from ..harmonic import solve_harmonic
from ..predictions import predict
from .fit import (DEFAULT_REG, FitReport, bessel_fit, enclosing_ball, fibonacci_sphere, mfs_fit,
                  tube_targets)


# ---------------------------------------------------------------------------
# return map of a Cartesian field in tube coordinates
# ---------------------------------------------------------------------------

def chart_velocity(chart: TubeChart, field, alpha: float, r, theta):
    """``(dr/dalpha, dtheta/dalpha)`` for the field lines of ``field`` (a
    callable ``(n, 3) -> (n, 3)``) written in the tube chart."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a = np.full(r.shape, alpha)
    x = chart.polar_to_cartesian(a, r, theta)
    u = np.asarray(field(x.reshape(-1, 3))).reshape(x.shape)
    t, e1, e2 = chart.transverse_frame(a)
    c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
    rho = c * e1 + s * e2
    ang = -s * e1 + c * e2
    B = chart.B(a, r, theta)
    ua = np.sum(u * t, -1) / B
    if np.any(ua <= 0):
        raise LeftDomain("field component along the core is not positive")
    ur = np.sum(u * rho, -1) / chart.eps
    ut = np.sum(u * ang, -1) / (chart.eps * r) + chart.tau(a) * ua
    return ur / ua, ut / ua


@dataclass
class SectionMap:
    """Interpolated return map ``(r, theta) -> (r', theta')`` with lifted ``theta``."""

    r_lo: float
    r_hi: float
    dr_coef: np.ndarray      # Chebyshev (in r) x Fourier (in theta) coefficients
    dth_coef: np.ndarray
    n_theta: int
    seed_r: np.ndarray
    seed_theta: np.ndarray
    dr: np.ndarray
    dth: np.ndarray

    def _eval(self, coef, r, theta):
        x = (2 * r - self.r_lo - self.r_hi) / (self.r_hi - self.r_lo)
        k = np.fft.rfftfreq(self.n_theta, 1.0 / self.n_theta)
        cheb = C.chebval(x, coef)  # (n_k,)
        w = np.exp(1j * k * theta)
        w[1:] *= 2
        if self.n_theta % 2 == 0:
            w[-1] = np.cos(k[-1] * theta)
        return float(np.real(np.sum(cheb * w)))

    def __call__(self, r, theta):
        return r + self._eval(self.dr_coef, r, theta), theta + self._eval(self.dth_coef, r, theta)

    def orbit(self, r0: float, theta0: float, n_iter: int):
        """Iterate the interpolated map; stops early when the orbit leaves ``[r_lo, r_hi]``."""
        rs, ths = [r0], [theta0]
        r, th = r0, theta0
        for _ in range(n_iter):
            r, th = self(r, th)
            if not (self.r_lo <= r <= self.r_hi):
                break
            rs.append(r)
            ths.append(th)
        return np.array(rs), np.array(ths)

    def interpolation_error(self, chart, field, n_test=4, tol=1e-9, seed=0):
        """Max deviation between the interpolant and direct integration at random points."""
        rng = np.random.default_rng(seed)
        r = rng.uniform(self.r_lo, self.r_hi, n_test)
        th = rng.uniform(0, 2 * np.pi, n_test)
        r1, th1 = _integrate_period(chart, field, r, th, tol)
        err = 0.0
        for i in range(n_test):
            ri, ti = self(r[i], th[i])
            err = max(err, abs(ri - r1[i]), abs(ti - th1[i]))
        return err


def _integrate_period(chart, field, r0, th0, tol):
    n = len(r0)

    def fun(a, y):
        fr, ft = chart_velocity(chart, field, a, y[:n], y[n:])
        return np.concatenate([fr, ft])

    sol = solve_ivp(fun, (0.0, chart.length), np.concatenate([r0, th0]), method="DOP853",
                    rtol=tol, atol=tol)
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y[:n, -1], sol.y[n:, -1]


def section_map(chart: TubeChart, field, r_lo=0.9, r_hi=1.02, n_r=7, n_theta=32,
                tol=1e-9) -> SectionMap:
    """Integrate seeds over one period and build the interpolated return map."""
    k = np.arange(n_r)
    x = np.cos(np.pi * k / (n_r - 1))
    r_nodes = 0.5 * (r_lo + r_hi) + 0.5 * (r_hi - r_lo) * x
    th_nodes = np.arange(n_theta) * 2 * np.pi / n_theta
    R, T = np.meshgrid(r_nodes, th_nodes, indexing="ij")
    r1, th1 = _integrate_period(chart, field, R.ravel(), T.ravel(), tol)
    dr = (r1 - R.ravel()).reshape(R.shape)
    dth = (th1 - T.ravel()).reshape(R.shape)

    def coefs(vals):
        F = np.fft.rfft(vals, axis=1) / n_theta      # (n_r, n_k)
        return C.chebfit(x, F, n_r - 1)               # (n_r, n_k) Chebyshev x Fourier

    return SectionMap(r_lo, r_hi, coefs(dr), coefs(dth), n_theta, r_nodes, th_nodes, dr, dth)


@dataclass
class OrbitReport:
    r0: float
    returns: int
    rotation: float
    rotation_error: float
    drift: float        # |weighted mean of r over the second half - over the first half|
    excursion: float    # max |r_n - r0| (includes oscillation along an invariant curve)
    left: bool

    def to_dict(self):
        return asdict(self)


def orbit_report(smap: SectionMap, r0: float, n_returns: int = 1000, theta0: float = 0.0) -> OrbitReport:
    rs, ths = smap.orbit(r0, theta0, n_returns)
    inc = np.diff(ths)
    left = len(rs) < n_returns + 1
    if len(inc) >= 4:
        full = _birkhoff(inc, True)
        err = abs(full - _birkhoff(inc[: len(inc) // 2], True))
        half = len(rs) // 2
        drift = abs(_birkhoff(rs[half:], True) - _birkhoff(rs[:half], True))
    else:
        full, err, drift = float("nan"), float("inf"), float("inf")
    return OrbitReport(float(r0), len(inc), full, err, float(drift), float(np.max(np.abs(rs - r0))),
                       bool(left))


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    lam: float | None = None          # default eps**3
    method: str = "bessel"            # "bessel" or "mfs"
    L: int = 24
    n_sources: int = 1600
    source_radius: float = 2.05       # in units of the enclosing radius R
    reg: float | None = None          # default: 0 (bessel) / DEFAULT_REG (mfs)
    samples_per_length: float = 12.0  # alpha samples per unit core length
    n_theta: int = 12
    shells: tuple = (0.9, 1.0)
    tol: float = 1e-3
    strict: bool = False
    margin: float = 1.0               # extra clearance between tubes, in units of eps
    grid: tuple = (256, 16, 32)
    section_r: tuple = (0.9, 1.02)
    section_n: tuple = (7, 32)
    ode_tol: float = 1e-9
    n_returns: int = 1000
    r_starts: tuple = (0.95, 1.0)
    orbits: bool = True

    def to_dict(self):
        return asdict(self)


@dataclass
class TubeReport:
    index: int
    misfit: float
    omega_pred: float
    orbits: list = field(default_factory=list)
    note: str = ""

    @property
    def rotation_defect(self):
        vals = [abs(o.rotation - self.omega_pred) for o in self.orbits if np.isfinite(o.rotation)]
        return max(vals) if vals and len(vals) == len(self.orbits) else float("inf")

    @property
    def drift(self):
        if not self.orbits or any(o.left for o in self.orbits):
            return float("inf")
        return max(o.drift for o in self.orbits)

    def to_dict(self):
        return dict(index=self.index, misfit=self.misfit, omega_pred=self.omega_pred,
                    rotation_defect=self.rotation_defect, drift=self.drift,
                    orbits=[o.to_dict() for o in self.orbits], note=self.note)


@dataclass
class PipelineResult:
    field: object
    fit: FitReport
    tubes: list
    config: PipelineConfig
    lam: float
    runtime: float

    def to_dict(self):
        return dict(lam=self.lam, fit=self.fit.to_dict(), tubes=[t.to_dict() for t in self.tubes],
                    config=self.config.to_dict(), runtime=self.runtime)


def check_disjoint(curves, eps: float, margin: float = 1.0, n: int = 512):
    """Raise :class:`TubesOverlap` if two cores come closer than ``(2 + margin) eps``."""
    pts = [c(np.arange(n) * c.length / n) for c in curves]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = np.sqrt(((pts[i][:, None] - pts[j][None]) ** 2).sum(-1)).min()
            if d < (2 + margin) * eps:
                raise TubesOverlap(f"tubes {i} and {j}: core distance {d:.4g} < {(2 + margin) * eps:.4g}")


def local_fields(curves, eps, grid=(256, 16, 32)):
    """Charts and harmonic fields ``h`` (the local field model) of every tube."""
    charts = [TubeChart(c, eps) for c in curves]
    return charts, [solve_harmonic(ch, *grid) for ch in charts]


def fit_global(targets, lam, cfg: PipelineConfig):
    if cfg.method == "bessel":
        reg = 0.0 if cfg.reg is None else cfg.reg
        return bessel_fit(targets, lam, cfg.L, reg=reg, kind="beltrami")
    if cfg.method == "mfs":
        reg = DEFAULT_REG if cfg.reg is None else cfg.reg
        center, R = enclosing_ball(targets.all_points)
        Z = fibonacci_sphere(cfg.n_sources, cfg.source_radius * R, center)
        return mfs_fit(targets, lam, Z, reg=reg, kind="beltrami", ball=(center, R))
    raise ValueError(f"unknown method {cfg.method!r}")


def pipeline(curves: list[ClosedCurve], eps: float, config: PipelineConfig | None = None,
             fields=None) -> PipelineResult:
    """Approximate the local fields of all tubes by one global Beltrami field.

    Parameters
    ----------
    curves : list of ClosedCurve
    eps : float
    config : PipelineConfig
    fields : list of callables ``(alpha, r, theta) -> (n, 3)``, optional
        Local fields to approximate (default: the harmonic fields ``h``).

    Raises
    ------
    TubesOverlap
    MisfitAboveTol
        Only with ``config.strict``.
    """
    cfg = config or PipelineConfig()
    t0 = time.perf_counter()
    lam = cfg.lam if cfg.lam is not None else eps ** 3
    check_disjoint(curves, eps, cfg.margin)
    charts = [TubeChart(c, eps) for c in curves]
    if fields is None:
        hs = [solve_harmonic(ch, *cfg.grid) for ch in charts]
        fields = [h.cartesian for h in hs]
    targets = None
    for i, (ch, f) in enumerate(zip(charts, fields)):
        n_alpha = int(np.ceil(cfg.samples_per_length * ch.length))
        t = tube_targets(ch, f, n_alpha, cfg.n_theta, cfg.shells, label=i)
        targets = t if targets is None else targets + t
    u, rep = fit_global(targets, lam, cfg)
    if cfg.strict and rep.misfit > cfg.tol:
        err = MisfitAboveTol(f"global misfit {rep.misfit:.3e} exceeds {cfg.tol:.1e}", rep.misfit)
        err.report = rep
        raise err
    tubes = []
    for i, ch in enumerate(charts):
        tr = TubeReport(i, rep.per_label.get(i, rep.misfit), predict(ch.curve, eps).omega)
        if cfg.orbits:
            try:
                smap = section_map(ch, u, *cfg.section_r, *cfg.section_n, tol=cfg.ode_tol)
                tr.orbits = [orbit_report(smap, r0, cfg.n_returns) for r0 in cfg.r_starts]
            except (LeftDomain, StepFailure) as exc:
                tr.note = f"section map failed: {exc}"
        tubes.append(tr)
    return PipelineResult(u, rep, tubes, cfg, lam, time.perf_counter() - t0)
