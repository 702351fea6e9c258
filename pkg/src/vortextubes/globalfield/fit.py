"""Least-squares realization of the approximation step.

The targets are samples of a local field on point sets near the tubes; the
approximant is either a point-source superposition (method of fundamental
solutions) with sources outside ``B_{2R}`` or a truncated Bessel series on
``B_R``.  Both can be fitted as Helmholtz fields (one scalar fit per
component) or directly in their Beltrami projection (``kind="beltrami"``).

The regularized solution minimizes
``|A c - v|^2 + (reg * s_max)^2 |D c|^2`` where ``D`` holds the column norms of
``A`` and ``s_max`` the largest singular value of the column-normalized
matrix; it is computed from one SVD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import IllConditioned, MisfitAboveTol
from .bessel import helmholtz_basis
from .fields import _LEVI, BesselSeriesField, PointSourceField, beltrami_project
from .helmholtz import greens_derivatives

DEFAULT_REG = 1e-12


@dataclass
class TargetSet:
    """Fit points/values and a disjoint held-out set (all ``(n, 3)``)."""

    points: np.ndarray
    values: np.ndarray
    heldout_points: np.ndarray | None = None
    heldout_values: np.ndarray | None = None
    labels: np.ndarray | None = None           # tube index of every fit point
    heldout_labels: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.values = np.asarray(self.values, dtype=float).reshape(-1, 3)
        if self.heldout_points is not None:
            self.heldout_points = np.asarray(self.heldout_points, dtype=float).reshape(-1, 3)
            self.heldout_values = np.asarray(self.heldout_values, dtype=float).reshape(-1, 3)

    @property
    def all_points(self):
        if self.heldout_points is None:
            return self.points
        return np.vstack([self.points, self.heldout_points])

    def __add__(self, other: "TargetSet") -> "TargetSet":
        def cat(a, b):
            return None if a is None or b is None else np.concatenate([a, b])
        return TargetSet(np.vstack([self.points, other.points]), np.vstack([self.values, other.values]),
                         cat(self.heldout_points, other.heldout_points),
                         cat(self.heldout_values, other.heldout_values),
                         cat(self.labels, other.labels), cat(self.heldout_labels, other.heldout_labels))


def tube_targets(chart, field, n_alpha=200, n_theta=12, shells=(0.9, 1.0),
                 heldout_shells=(0.95, 1.0), label=0) -> TargetSet:
    """Sample ``field(alpha, r, theta) -> (n, 3)`` on shells of a tube.

    The held-out set uses ``heldout_shells`` on a grid shifted by half a step
    in both angles.
    """
    def sample(off, rs):
        a = (np.arange(n_alpha) + off) * chart.length / n_alpha
        t = (np.arange(n_theta) + off) * 2 * np.pi / n_theta
        A, R, T = (v.ravel() for v in np.meshgrid(a, rs, t, indexing="ij"))
        return chart.polar_to_cartesian(A, R, T), np.asarray(field(A, R, T))
    X, V = sample(0.0, shells)
    Xh, Vh = sample(0.5, heldout_shells)
    return TargetSet(X, V, Xh, Vh, np.full(len(X), label), np.full(len(Xh), label))


def enclosing_ball(points, center=None):
    """``(center, R)`` of a ball containing ``points`` (centroid unless given)."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    c = points.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    return c, float(np.linalg.norm(points - c, axis=1).max())


def fibonacci_sphere(n: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """``n`` nearly uniform points on a sphere (spherical Fibonacci lattice)."""
    i = np.arange(n) + 0.5
    polar = np.arccos(1 - 2 * i / n)
    azim = np.pi * (1 + 5 ** 0.5) * i
    p = np.stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)], 1)
    return np.asarray(center, dtype=float) + radius * p


@dataclass
class FitReport:
    """Diagnostics of a least-squares fit (misfits are relative C^0 values,
    ``max |w - v| / max |v|``)."""

    method: str
    kind: str
    n_unknowns: int
    n_equations: int
    fit_misfit: float
    heldout_misfit: float | None
    condition: float
    reg: float
    rank: int
    coeff_max: float
    per_label: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def misfit(self):
        return self.heldout_misfit if self.heldout_misfit is not None else self.fit_misfit

    def to_dict(self):
        d = dict(self.__dict__)
        d["per_label"] = {str(k): v for k, v in self.per_label.items()}
        return d


def _relative(err, ref):
    scale = float(np.abs(ref).max())
    return float(np.abs(err).max()) / (scale if scale > 0 else 1.0)


def solve_regularized(A, b, reg: float = DEFAULT_REG, cutoff: float = 1e-16):
    """Column-normalized SVD solve of ``min |A c - b|^2 + (reg s_max)^2 |D c|^2``.

    ``reg = 0`` gives the pseudo-inverse with singular values below
    ``cutoff * s_max`` discarded.  Returns ``(c, condition, rank)``.
    """
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    U, s, Vt = np.linalg.svd(A / norms, full_matrices=False)
    smax = s[0]
    if reg > 0:
        filt = s / (s ** 2 + (reg * smax) ** 2)
        rank = int(np.sum(s > reg * smax))
    else:
        keep = s > cutoff * smax
        filt = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
        rank = int(keep.sum())
    c = Vt.T @ (filt[:, None] * (U.T @ b.reshape(len(b), -1)))
    cond = float(smax / s[-1]) if s[-1] > 0 else np.inf
    return (c / norms[:, None]).reshape((A.shape[1],) + b.shape[1:]), cond, rank


# ---------------------------------------------------------------------------
# design matrices
# ---------------------------------------------------------------------------

def _projected_columns(F0, F1, F2, lam):
    """``P[f e_a]`` for scalar functions with values/derivatives ``F0 (m, n)``,
    ``F1 (m, n, 3)``, ``F2 (m, n, 3, 3)``; returns ``(n, 3, m, 3)`` indexed
    ``[point, component, function, a]``."""
    m, n = F0.shape
    I3 = np.eye(3)
    # grad d_a f: F2[m, n, i, a]; lam^2 f e_a; lam (grad f x e_a)_i = lam eps_ijk d_j f delta_ka
    cols = (np.einsum("mnia->nima", F2) + lam ** 2 * np.einsum("mn,ia->nima", F0, I3)
            + lam * np.einsum("ija,mnj->nima", _LEVI, F1))
    return cols / (2 * lam ** 2)


def _mfs_design(points, sources, lam, kind):
    order = 2 if kind == "beltrami" else 0
    G = greens_derivatives(points[:, None, :] - sources[None], lam, order)
    if kind == "helmholtz":
        return G[0]
    F0 = G[0].T
    F1 = np.moveaxis(G[1], 1, 0)
    F2 = np.moveaxis(G[2], 1, 0)
    return _projected_columns(F0, F1, F2, lam)


def _bessel_design(points, L, lam, center, scale, kind):
    xs = (points - center) / scale
    lt = lam * scale
    if kind == "helmholtz":
        return helmholtz_basis(xs, L, lt, 0)[0].T
    F0, F1, F2 = helmholtz_basis(xs, L, lt, 2)
    # derivatives in physical coordinates: the projection is scale invariant
    return _projected_columns(F0, F1, F2, lt)


def _solve(design, targets: TargetSet, kind, reg, cutoff):
    V = targets.values
    if kind == "helmholtz":
        C, cond, rank = solve_regularized(design, V, reg, cutoff)
        return C, cond, rank
    n, _, m, _ = design.shape
    A = design.reshape(3 * n, 3 * m)
    c, cond, rank = solve_regularized(A, V.reshape(-1), reg, cutoff)
    return c.reshape(m, 3), cond, rank


def _apply(design, C, kind):
    if kind == "helmholtz":
        return design @ C
    return np.einsum("nima,ma->ni", design, C)


def _report(method, kind, design_fit, design_held, C, targets, cond, reg, rank, extra=None):
    W = _apply(design_fit, C, kind)
    fit_mis = _relative(W - targets.values, targets.values)
    held = None
    per = {}
    if design_held is not None:
        Wh = _apply(design_held, C, kind)
        held = _relative(Wh - targets.heldout_values, targets.heldout_values)
        if targets.heldout_labels is not None:
            for lab in np.unique(targets.heldout_labels):
                sel = targets.heldout_labels == lab
                per[int(lab)] = _relative(Wh[sel] - targets.heldout_values[sel], targets.heldout_values[sel])
    n_eq = targets.values.size
    return FitReport(method, kind, int(C.size), int(n_eq), fit_mis, held, cond, reg, rank,
                     float(np.abs(C).max()), per, extra or {})


def _check(report: FitReport, tol, cond_max):
    if cond_max is not None and report.condition > cond_max:
        raise IllConditioned(f"condition estimate {report.condition:.2e} exceeds {cond_max:.1e}",
                             report.condition)
    if tol is not None and report.misfit > tol:
        err = MisfitAboveTol(f"misfit {report.misfit:.3e} exceeds {tol:.1e}", report.misfit)
        err.report = report
        raise err


def mfs_fit(targets: TargetSet, lam: float, sources, reg: float = DEFAULT_REG, kind="helmholtz",
            ball=None, tol=None, cond_max=None, cutoff=1e-16):
    """Point-source fit ``w = sum_j c_j G(x - z_j)`` to the targets.

    Parameters
    ----------
    targets : TargetSet
    lam : float
    sources : (J, 3) array
        Must lie outside ``B_{2R}`` for the ball ``(center, R)`` enclosing all
        target points (``ball`` overrides the default enclosing ball).
    reg : float
        Tikhonov parameter relative to the largest singular value.
    kind : {"helmholtz", "beltrami"}
        Fit ``w`` itself, or its Beltrami projection ``P[w]``.

    Returns
    -------
    (PointSourceField or GlobalBeltramiField, FitReport)
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    center, R = ball if ball is not None else enclosing_ball(targets.all_points)
    dist = np.linalg.norm(sources - center, axis=1)
    if np.any(dist <= 2 * R):
        raise ValueError(f"sources must lie outside B_2R (R = {R:.4g}); closest at {dist.min():.4g}")
    D = _mfs_design(targets.points, sources, lam, kind)
    C, cond, rank = _solve(D, targets, kind, reg, cutoff)
    Dh = None if targets.heldout_points is None else _mfs_design(targets.heldout_points, sources, lam, kind)
    rep = _report("mfs", kind, D, Dh, C, targets, cond, reg, rank,
                  dict(n_sources=len(sources), R=R, center=np.asarray(center).tolist(),
                       source_radius=float(dist.min()) / R))
    w = PointSourceField(lam, sources, C)
    _check(rep, tol, cond_max)
    return (beltrami_project(w) if kind == "beltrami" else w), rep


def bessel_fit(targets: TargetSet, lam: float, L: int, reg: float = 0.0, kind="helmholtz",
               ball=None, tol=None, cond_max=None, cutoff=1e-15):
    """Truncated Bessel-series fit on the enclosing ball (coordinates are
    scaled to the unit ball internally).  ``reg = 0`` uses the truncated
    pseudo-inverse with relative cutoff ``cutoff``.

    Returns
    -------
    (BesselSeriesField or GlobalBeltramiField, FitReport)
    """
    center, R = ball if ball is not None else enclosing_ball(targets.all_points)
    D = _bessel_design(targets.points, L, lam, center, R, kind)
    C, cond, rank = _solve(D, targets, kind, reg, cutoff)
    Dh = None if targets.heldout_points is None else _bessel_design(targets.heldout_points, L, lam, center, R, kind)
    rep = _report("bessel", kind, D, Dh, C, targets, cond, reg, rank, dict(L=L, R=R, center=np.asarray(center).tolist()))
    w = BesselSeriesField(lam, L, C, center, R)
    _check(rep, tol, cond_max)
    return (beltrami_project(w) if kind == "beltrami" else w), rep


__all__ = ["TargetSet", "tube_targets", "enclosing_ball", "fibonacci_sphere", "FitReport",
           "solve_regularized", "mfs_fit", "bessel_fit", "DEFAULT_REG"]
