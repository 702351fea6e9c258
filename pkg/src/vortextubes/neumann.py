"""Neumann problem ``lap psi = rho`` in the tube with zero normal derivative
and zero mean.

Unknowns are the grid values of ``psi`` plus one Lagrange constant ``c``:

* interior collocation rows: ``lap psi + c = rho``;
* boundary rows (``r = 1``): ``psi_r = 0``;
* one gauge row: ``int psi dalpha dy = 0``.

The bordered system is nonsingular; for a compatible source the discrete ``c``
is of the size of the discretization error.  GMRES is preconditioned with the
constant-coefficient model operator
``eps^-2 (d_rr + d_r / r - m^2 / r^2) - (k + tau_mean m)^2``, which is
block diagonal in the Fourier pair ``(k, m)``.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .chart import TubeChart
from .errors import IncompatibleSource, NoConvergence
from .grid import TubeGrid, TubeScalarField

log = logging.getLogger(__name__)

COMPAT_TOL = 1e-10


class NeumannSolver:
    """Reusable solver for one grid (the preconditioner is built once)."""

    def __init__(self, grid: TubeGrid):
        self.grid = grid
        self._build_preconditioner()

    # -- operator ------------------------------------------------------------
    def _apply(self, x):
        g = self.grid
        n = np.prod(g.shape)
        psi = x[:n].reshape(g.shape)
        c = x[n]
        out = g.laplacian(psi) + c
        out[:, 0, :] = g.d_r(psi)[:, 0, :]
        mean = np.sum(psi * g.weights) / self._wsum
        return np.concatenate([out.ravel(), [mean]])

    def _build_preconditioner(self):
        g = self.grid
        rad = g.radial
        nr = g.n_r
        r = rad.r
        eps = g.eps
        self._wsum = float(np.sum(g.weights))
        k = 2 * np.pi / g.length * np.fft.fftfreq(g.n_alpha, 1.0 / g.n_alpha)
        m = np.fft.fftfreq(g.n_theta, 1.0 / g.n_theta)
        tau_bar = float(np.mean(g.tau))
        ops = {}
        for par in (0, 1):
            D = rad.folded(rad.D[:nr], par)
            D2 = rad.folded(rad.D2[:nr], par)
            ops[par] = (D, D2)
        K, M = np.meshgrid(k, m, indexing="ij")
        inv = np.empty((g.n_alpha, g.n_theta, nr, nr))
        for ia in range(g.n_alpha):
            for it in range(g.n_theta):
                mm = M[ia, it]
                D, D2 = ops[int(abs(mm)) % 2]
                L = (D2 + D / r[:, None] - np.diag(mm ** 2 / r ** 2)) / eps ** 2
                L -= (K[ia, it] + tau_bar * mm) ** 2 * np.eye(nr)
                L[0] = D[0]
                if ia == 0 and it == 0:
                    continue
                inv[ia, it] = np.linalg.inv(L)
        # bordered (0, 0) block: unknowns (psi_hat00, c)
        D, D2 = ops[0]
        L = (D2 + D / r[:, None]) / eps ** 2
        L[0] = D[0]
        Z = np.zeros((nr + 1, nr + 1))
        Z[:nr, :nr] = L
        Z[1:nr, nr] = 1.0
        Z[nr, :nr] = rad.weights / np.sum(rad.weights)
        self._inv00 = np.linalg.inv(Z)
        inv[0, 0] = 0.0
        self._inv = inv

    def _precondition(self, y):
        g = self.grid
        n = np.prod(g.shape)
        res = y[:n].reshape(g.shape)
        R = np.fft.fft2(res, axes=(0, 2))  # (k, r, m)
        X = np.einsum("kmij,kjm->kim", self._inv, R)
        # gauge block: normalized mean over (alpha, theta) of the k = m = 0 column
        scale = g.n_alpha * g.n_theta
        rhs = np.concatenate([R[0, :, 0].real / scale, [y[n]]])
        sol = self._inv00 @ rhs
        X[0, :, 0] = sol[:-1] * scale
        psi = np.fft.ifft2(X, axes=(0, 2)).real
        return np.concatenate([psi.ravel(), [sol[-1]]])

    # -- solve ---------------------------------------------------------------
    def solve(self, rho: TubeScalarField, tol: float = 1e-10, compat_tol: float = COMPAT_TOL,
              maxiter: int = 10, restart: int = 60) -> TubeScalarField:
        """Solve ``lap psi = rho``.

        Parameters
        ----------
        rho : TubeScalarField
            Source; must satisfy ``|int rho dV| <= compat_tol * ||rho||_inf * |tube|``.
        tol : float
            Target residual ``||lap psi - rho||_inf <= tol * ||rho||_inf``.

        Raises
        ------
        IncompatibleSource
            Source does not integrate to zero.
        NoConvergence
            GMRES stalls before reaching ``tol``.
        """
        g = self.grid
        rhs_field = np.asarray(rho.values, dtype=float)
        scale = float(np.max(np.abs(rhs_field)))
        if scale == 0.0:
            out = TubeScalarField(g, np.zeros(g.shape), "psi")
            out.info = dict(residual=0.0, boundary_residual=0.0, iterations=0, multiplier=0.0)
            return out
        vol = g.integrate(np.ones(g.shape), volume=True)
        compat = g.integrate(rhs_field, volume=True) / (vol * scale)
        if abs(compat) > compat_tol:
            raise IncompatibleSource(f"relative int rho dV = {compat:.3e}")
        n = np.prod(g.shape)
        b = rhs_field.copy()
        b[:, 0, :] = 0.0
        b = np.concatenate([b.ravel(), [0.0]])
        A = LinearOperator((n + 1, n + 1), matvec=self._apply, dtype=float)
        P = LinearOperator((n + 1, n + 1), matvec=self._precondition, dtype=float)
        x0 = self._precondition(b)
        its = [0]

        def cb(_):
            its[0] += 1

        # GMRES works with 2-norms; aim a bit below the sup-norm target and
        # polish with a few restarts if needed
        x = x0
        for attempt in range(4):
            x, info = gmres(A, b, x0=x, M=P, rtol=tol * 1e-2, atol=0.0, restart=restart,
                            maxiter=maxiter, callback=cb, callback_type="pr_norm")
            res = self._apply(x) - b
            rel = float(np.max(np.abs(res[:n])) / scale)
            log.debug("gmres pass %d: sup residual %.3e after %d iterations", attempt, rel, its[0])
            if rel <= tol:
                break
        else:
            raise NoConvergence(f"residual {rel:.2e} above tol {tol:.0e} after {its[0]} iterations")
        psi = x[:n].reshape(g.shape)
        lap = g.laplacian(psi)
        interior = np.abs(lap[:, 1:, :] - rhs_field[:, 1:, :]).max() / scale
        out = TubeScalarField(g, psi, "psi")
        out.info = dict(residual=float(interior), boundary_residual=float(np.abs(g.d_r(psi)[:, 0, :]).max()),
                        iterations=its[0], multiplier=float(x[n]), compatibility=float(compat))
        log.debug("neumann solve: %s", out.info)
        return out


def solve_neumann(chart_or_grid, rho: TubeScalarField, tol: float = 1e-10) -> TubeScalarField:
    """Convenience wrapper building a :class:`NeumannSolver` on ``rho.grid``."""
    grid = rho.grid
    if isinstance(chart_or_grid, TubeChart) and chart_or_grid is not grid.chart:
        raise ValueError("source lives on a different chart")
    return NeumannSolver(grid).solve(rho, tol=tol)


def harmonic_source(grid: TubeGrid) -> TubeScalarField:
    """``rho = eps r (tau kappa sin(theta) - kappa' cos(theta)) / B^3``,
    minus the divergence of ``h0 = B^-2 (d_alpha + tau d_theta)``."""
    eps = grid.eps
    kap, tau, dkap = grid.curve3(grid.kap), grid.curve3(grid.tau), grid.curve3(grid.dkap)
    vals = eps * grid.R3 * (tau * kap * np.sin(grid.T3) - dkap * np.cos(grid.T3)) / grid.B ** 3
    return TubeScalarField(grid, np.broadcast_to(vals, grid.shape).copy(), "rho")
