"""Vector solutions of ``Delta w + lam^2 w = 0`` and their Beltrami projection.

Every field exposes ``derivatives(x, order)`` returning
``[w, Dw, D2w, D3w][:order+1]`` with ``w[n, a]``, ``Dw[n, a, i] = d_i w_a``,
``D2w[n, a, i, j]`` and ``D3w[n, a, i, j, k]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bessel import helmholtz_basis, real_index
from .helmholtz import EXCLUSION_RADIUS, greens_derivatives

_LEVI = np.zeros((3, 3, 3))
_LEVI[0, 1, 2] = _LEVI[1, 2, 0] = _LEVI[2, 0, 1] = 1.0
_LEVI[0, 2, 1] = _LEVI[2, 1, 0] = _LEVI[1, 0, 2] = -1.0

# number of float64 entries allowed per evaluation chunk
_CHUNK_BUDGET = 4_000_000


def _chunks(n, per_point):
    size = max(1, int(_CHUNK_BUDGET // max(per_point, 1)))
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


def _points(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 3), x.shape[:-1]


class HelmholtzField:
    """Common evaluation helpers (subclasses implement ``_derivatives``)."""

    lam: float

    def derivatives(self, x, order: int = 0):
        pts, shape = _points(x)
        parts = self._derivatives(pts, order)
        return [p.reshape(shape + p.shape[1:]) for p in parts]

    def __call__(self, x):
        return self.derivatives(x, 0)[0]

    def jacobian(self, x):
        return self.derivatives(x, 1)[1]

    def laplacian(self, x):
        D2 = self.derivatives(x, 2)[2]
        return np.trace(D2, axis1=-2, axis2=-1)

    def curl(self, x):
        D1 = self.jacobian(x)
        return np.einsum("abc,...cb->...a", _LEVI, D1)


@dataclass
class PointSourceField(HelmholtzField):
    """``w(x) = sum_j c_j G(x - z_j)`` with ``G = cos(lam r) / (4 pi r)``."""

    lam: float
    sources: np.ndarray
    coeffs: np.ndarray
    exclusion: float = EXCLUSION_RADIUS

    def __post_init__(self):
        self.sources = np.atleast_2d(np.asarray(self.sources, dtype=float))
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.coeffs.shape != self.sources.shape:
            raise ValueError("one R^3 coefficient per source is required")

    def _derivatives(self, pts, order):
        J = len(self.sources)
        comps = 3 ** order
        out = [np.empty((len(pts), 3) + (3,) * k) for k in range(order + 1)]
        for sl in _chunks(len(pts), 4 * J * comps):
            G = greens_derivatives(pts[sl, None, :] - self.sources[None], self.lam, order, self.exclusion)
            for k, g in enumerate(G):
                out[k][sl] = np.einsum("ja,nj...->na...", self.coeffs, g)
        return out

    def to_dict(self):
        return dict(kind="point_sources", lam=self.lam, sources=self.sources.tolist(),
                    coeffs=self.coeffs.tolist(), exclusion=self.exclusion)


@dataclass
class BesselSeriesField(HelmholtzField):
    """``w(x) = sum_b c_b qh_l(lam r') g_b(x')`` with ``x' = (x - center) / scale``.

    Basis functions are indexed by :func:`~.bessel.real_index` (real and
    imaginary parts of ``j_l Y_lm`` up to constants); ``coeffs`` has shape
    ``(len(real_index(L)), 3)``.
    """

    lam: float
    L: int
    coeffs: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.center = np.asarray(self.center, dtype=float)
        nb = len(real_index(self.L))
        if self.coeffs.shape != (nb, 3):
            raise ValueError(f"expected coefficient array of shape {(nb, 3)}")

    @property
    def scaled_lambda(self):
        return self.lam * self.scale

    def _derivatives(self, pts, order):
        nb = self.coeffs.shape[0]
        per = 6 * (self.L + 1) * (2 * self.L + 1) * 3 ** order + nb * 3 ** order * 4
        out = [np.empty((len(pts), 3) + (3,) * k) for k in range(order + 1)]
        for sl in _chunks(len(pts), per):
            xs = (pts[sl] - self.center) / self.scale
            F = helmholtz_basis(xs, self.L, self.scaled_lambda, order)
            for k, f in enumerate(F):
                out[k][sl] = np.einsum("ba,bn...->na...", self.coeffs, f) / self.scale ** k
        return out

    def to_dict(self):
        return dict(kind="bessel_series", lam=self.lam, L=self.L, coeffs=self.coeffs.tolist(),
                    center=self.center.tolist(), scale=self.scale)


@dataclass
class PlaneWaveField(HelmholtzField):
    """``w(x) = sum_j a_j cos(lam k_j . x + phi_j)`` with unit directions ``k_j``.

    Used for exact eigenfields, e.g. the ABC flow
    ``(A sin lam z + C cos lam y, B sin lam x + A cos lam z, C sin lam y + B cos lam x)``
    built by :meth:`abc` (``curl w = sign * lam * w``).
    """

    lam: float
    directions: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        self.directions = self.directions / np.linalg.norm(self.directions, axis=1, keepdims=True)
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        self.phases = np.atleast_1d(np.asarray(self.phases, dtype=float))

    @classmethod
    def abc(cls, lam: float, A: float = 1.0, B: float = 1.0, C: float = 1.0, sign: int = 1):
        """ABC flow with ``curl w = sign * lam * w``."""
        s = 1.0 if sign > 0 else -1.0
        h = np.pi / 2
        dirs = [(0, 0, 1), (0, 0, 1), (1, 0, 0), (1, 0, 0), (0, 1, 0), (0, 1, 0)]
        amps = [(A, 0, 0), (0, A, 0), (0, B, 0), (0, 0, B), (0, 0, C), (C, 0, 0)]
        # sin(t) = cos(t - pi/2); the mirror flow flips the sine terms
        phases = [-h, 0.0, -h, 0.0, -h, 0.0]
        amps = np.array(amps, dtype=float)
        amps[0::2] *= s
        return cls(lam, np.array(dirs, dtype=float), amps, np.array(phases))

    def _derivatives(self, pts, order):
        ph = self.lam * pts @ self.directions.T + self.phases  # (n, J)
        out = []
        for k in range(order + 1):
            # k-th derivative of cos is cos(t + k pi/2)
            trig = np.cos(ph + k * np.pi / 2) * self.lam ** k
            val = np.einsum("nj,ja->na", trig, self.amplitudes)
            if k == 0:
                out.append(val)
                continue
            kk = self.directions
            tensor = kk
            for _ in range(k - 1):
                tensor = np.einsum("j...,jb->j...b", tensor, kk)
            out.append(np.einsum("nj,ja,j...->na...", trig, self.amplitudes, tensor))
        return out

    def to_dict(self):
        return dict(kind="plane_waves", lam=self.lam, directions=self.directions.tolist(),
                    amplitudes=self.amplitudes.tolist(), phases=self.phases.tolist())


def field_from_dict(d) -> HelmholtzField:
    """Inverse of ``to_dict`` for all representations."""
    if d["kind"] == "plane_waves":
        return PlaneWaveField(d["lam"], np.array(d["directions"]), np.array(d["amplitudes"]),
                              np.array(d["phases"]))
    if d["kind"] == "point_sources":
        return PointSourceField(d["lam"], np.array(d["sources"]), np.array(d["coeffs"]),
                                d.get("exclusion", EXCLUSION_RADIUS))
    if d["kind"] == "bessel_series":
        return BesselSeriesField(d["lam"], d["L"], np.array(d["coeffs"]), np.array(d["center"]),
                                 d["scale"])
    raise ValueError(f"unknown field kind {d['kind']!r}")


class GlobalBeltramiField:
    """``u = (curl curl w + lam curl w) / (2 lam^2)`` for a Helmholtz field ``w``.

    Because ``Delta w = -lam^2 w`` this equals
    ``(grad div w + lam^2 w + lam curl w) / (2 lam^2)`` and needs only second
    derivatives of ``w``; the Jacobian of ``u`` uses third derivatives.
    """

    def __init__(self, helmholtz: HelmholtzField):
        self.helmholtz = helmholtz
        self.lam = float(helmholtz.lam)

    def derivatives(self, x, order: int = 0):
        if order > 1:
            raise ValueError("u is available with first derivatives only")
        lam = self.lam
        W = self.helmholtz.derivatives(x, order + 2)
        w, D1, D2 = W[0], W[1], W[2]
        grad_div = np.einsum("...iia->...a", D2)
        curl = np.einsum("abc,...cb->...a", _LEVI, D1)
        u = (grad_div + lam ** 2 * w + lam * curl) / (2 * lam ** 2)
        if order == 0:
            return [u]
        D3 = W[3]
        # d_k u_a
        dgd = np.einsum("...iiak->...ak", D3)
        dcurl = np.einsum("abc,...cbk->...ak", _LEVI, D2)
        Du = (dgd + lam ** 2 * D1 + lam * dcurl) / (2 * lam ** 2)
        return [u, Du]

    def __call__(self, x):
        return self.derivatives(x, 0)[0]

    def jacobian(self, x):
        return self.derivatives(x, 1)[1]

    def curl(self, x):
        return np.einsum("abc,...cb->...a", _LEVI, self.jacobian(x))

    def divergence(self, x):
        return np.trace(self.jacobian(x), axis1=-2, axis2=-1)

    def to_dict(self):
        return dict(kind="beltrami_projection", helmholtz=self.helmholtz.to_dict())


def beltrami_project(w: HelmholtzField, lam: float | None = None) -> GlobalBeltramiField:
    """Project a Helmholtz field onto the ``curl = +lam`` eigenspace."""
    if lam is not None and not np.isclose(lam, w.lam, rtol=1e-14, atol=0):
        raise ValueError("projection eigenvalue must match the field's lambda")
    return GlobalBeltramiField(w)

