"""Spectral grid on ``S^1_l x D^2``: Fourier in ``alpha`` and ``theta``,
parity-folded Chebyshev collocation in ``r`` (the axis ``r = 0`` is never a node).

Field values are arrays of shape ``(n_alpha, n_r, n_theta)``; radial index 0 is
the boundary ``r = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._spectral import DiskRadial, fourier_diff
from .chart import TubeChart, laplacian_coefficients
from .errors import ResolutionTooLow


class TubeGrid:
    """Collocation grid attached to a :class:`TubeChart`.

    Parameters
    ----------
    chart : TubeChart
    n_alpha, n_r, n_theta : int
        Number of ``alpha`` samples, positive radial nodes and ``theta``
        samples (``n_alpha`` and ``n_theta`` must be even).
    """

    def __init__(self, chart: TubeChart, n_alpha: int = 256, n_r: int = 16, n_theta: int = 32):
        if n_alpha % 2 or n_theta % 2:
            raise ValueError("n_alpha and n_theta must be even")
        self.chart = chart
        self.eps = chart.eps
        self.length = chart.length
        self.n_alpha, self.n_r, self.n_theta = n_alpha, n_r, n_theta
        self.shape = (n_alpha, n_r, n_theta)
        self.radial = DiskRadial(n_r)
        self.alpha = np.arange(n_alpha) * self.length / n_alpha
        self.r = self.radial.r
        self.theta = np.arange(n_theta) * 2 * np.pi / n_theta
        self.kap = chart.kappa(self.alpha)
        self.tau = chart.tau(self.alpha)
        self.dkap = chart.kappa(self.alpha, 1)
        self.dtau = chart.tau(self.alpha, 1)
        nr = n_r
        self._Dr = self.radial.split(self.radial.D[:nr])
        self._Drr = self.radial.split(self.radial.D2[:nr])

    # -- broadcast coordinates ----------------------------------------------
    @property
    def A3(self):
        return self.alpha[:, None, None]

    @property
    def R3(self):
        return self.r[None, :, None]

    @property
    def T3(self):
        return self.theta[None, None, :]

    def curve3(self, values):
        return np.asarray(values)[:, None, None]

    @cached_property
    def B(self):
        return 1.0 - self.eps * self.curve3(self.kap) * self.R3 * np.cos(self.T3)

    @cached_property
    def A(self):
        return self.B ** 2 + (self.eps * self.curve3(self.tau) * self.R3) ** 2

    @cached_property
    def coeffs(self):
        return laplacian_coefficients(self.eps, self.R3, self.T3, self.curve3(self.kap),
                                      self.curve3(self.tau), self.curve3(self.dkap),
                                      self.curve3(self.dtau))

    @cached_property
    def weights(self):
        """Quadrature weights for ``int f dalpha dy``."""
        w = self.radial.weights[None, :, None] * (self.length / self.n_alpha) * (2 * np.pi / self.n_theta)
        return np.broadcast_to(w, self.shape)

    @cached_property
    def volume_weights(self):
        """Quadrature weights for ``int f dV`` (``dV = B dalpha dy``)."""
        return self.weights * self.B

    def integrate(self, u, volume: bool = False) -> float:
        return float(np.sum(u * (self.volume_weights if volume else self.weights)))

    def disk_integral(self, u):
        """``int_{D^2} u(alpha, y) dy`` for every alpha node."""
        w = self.radial.weights[None, :, None] * (2 * np.pi / self.n_theta)
        return np.sum(u * w, axis=(1, 2))

    # -- differentiation -----------------------------------------------------
    def d_alpha(self, u, order: int = 1):
        return fourier_diff(u, self.length, order, axis=0)

    def d_theta(self, u, order: int = 1):
        return fourier_diff(u, 2 * np.pi, order, axis=2)

    def _radial_apply(self, ops, u, parity):
        same, opp = ops
        u_opp = np.roll(u, self.n_theta // 2, axis=2)
        return np.einsum("ij,ajt->ait", same, u) + parity * np.einsum("ij,ajt->ait", opp, u_opp)

    def d_r(self, u, parity: int = 1):
        """Radial derivative.  ``parity=-1`` for fields that are themselves
        radial derivatives (odd under ``(r, theta) -> (-r, theta + pi)``)."""
        return self._radial_apply(self._Dr, u, parity)

    def d_rr(self, u, parity: int = 1):
        return self._radial_apply(self._Drr, u, parity)

    def derivatives(self, u):
        """All first and second derivatives needed by the Laplacian."""
        ua = self.d_alpha(u)
        return dict(r=self.d_r(u), rr=self.d_rr(u), th=self.d_theta(u), thth=self.d_theta(u, 2),
                    a=ua, aa=self.d_alpha(u, 2), ath=self.d_theta(ua))

    def laplacian(self, u):
        c = self.coeffs
        d = self.derivatives(u)
        return (c.rr * d["rr"] + c.r_ * d["r"] + c.thth * d["thth"] + c.aa * d["aa"]
                + c.ath * d["ath"] + c.th * d["th"] + c.a * d["a"])

    # -- resolution diagnostics ---------------------------------------------
    def spectral_tail(self, u) -> float:
        """Relative size of the top eighth of the alpha and theta spectra."""
        U = np.abs(np.fft.fft2(u, axes=(0, 2)))
        top = U.max()
        if top == 0:
            return 0.0
        ka = np.abs(np.fft.fftfreq(self.n_alpha, 1.0 / self.n_alpha))
        kt = np.abs(np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta))
        tail_a = U[ka >= 3 * self.n_alpha // 8].max()
        tail_t = U[:, :, kt >= 3 * self.n_theta // 8].max()
        return float(max(tail_a, tail_t) / top)


def fft_field(u):
    """Normalized 2-D Fourier coefficients over ``(alpha, theta)``."""
    n_alpha, _, n_theta = u.shape
    return np.fft.fft2(u, axes=(0, 2)) / (n_alpha * n_theta)


@dataclass
class TubeScalarField:
    """Grid function on a :class:`TubeGrid` (``values`` shape = ``grid.shape``)."""

    grid: TubeGrid
    values: np.ndarray
    name: str = ""
    info: dict | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"shape {self.values.shape} != grid {self.grid.shape}")

    @classmethod
    def from_function(cls, grid: TubeGrid, f, name=""):
        """Sample ``f(alpha, r, theta)`` (broadcasting) on the grid."""
        vals = np.broadcast_to(f(grid.A3, grid.R3, grid.T3), grid.shape)
        return cls(grid, np.array(vals, dtype=float), name)

    def mean(self) -> float:
        """Mean with respect to ``dalpha dy``."""
        return self.grid.integrate(self.values) / (np.pi * self.grid.length)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __sub__(self, other):
        v = other.values if isinstance(other, TubeScalarField) else other
        return TubeScalarField(self.grid, self.values - v)

    def __add__(self, other):
        v = other.values if isinstance(other, TubeScalarField) else other
        return TubeScalarField(self.grid, self.values + v)


def laplacian_apply(field: TubeScalarField, tail_tol: float | None = 1e-6) -> TubeScalarField:
    """Tube Laplacian of a grid field.

    Raises
    ------
    ResolutionTooLow
        If the top of the alpha/theta spectrum carries more than ``tail_tol``
        of the peak amplitude.
    """
    g = field.grid
    if tail_tol is not None:
        tail = g.spectral_tail(field.values)
        if tail > tail_tol:
            raise ResolutionTooLow(f"spectral tail {tail:.2e} exceeds {tail_tol:.0e}")
    return TubeScalarField(g, g.laplacian(field.values), "laplacian")


def fast_mean_removed(field: TubeScalarField) -> TubeScalarField:
    """Subtract the disk average at every ``alpha``: ``psi - (1/pi) int_D psi dy``."""
    g = field.grid
    avg = g.disk_integral(field.values) / np.pi
    return TubeScalarField(g, field.values - avg[:, None, None], "fast_mean_removed")
