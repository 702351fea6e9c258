"""Small spectral toolbox: periodic series, Fourier differentiation, Chebyshev
matrices and the parity-folded radial discretization of the unit disk."""

from __future__ import annotations

import numpy as np


def wavenumbers(n: int, period: float) -> np.ndarray:
    """Angular wavenumbers of ``np.fft.fft`` output for ``n`` samples."""
    return 2.0 * np.pi / period * np.fft.fftfreq(n, d=1.0 / n)


def fourier_diff(f, period=2.0 * np.pi, order=1, axis=-1):
    """Spectral derivative of uniformly sampled periodic data along ``axis``.

    The Nyquist mode is dropped for odd orders so the result stays real.
    """
    f = np.asarray(f)
    n = f.shape[axis]
    k = wavenumbers(n, period)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * mult.reshape(shape), axis=axis)
    return out.real if np.isrealobj(f) else out


class PeriodicSeries:
    """Real trigonometric polynomial on ``[0, period)`` built from samples.

    ``value(s) = a0 + sum_k a_k cos(k w s) + b_k sin(k w s)`` with ``w = 2 pi / period``.
    """

    def __init__(self, a0, a, b, period):
        self.a0 = float(a0)
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.period = float(period)

    @classmethod
    def from_samples(cls, values, period, drop_nyquist=True):
        values = np.asarray(values, dtype=float)
        n = values.size
        c = np.fft.rfft(values) / n
        kmax = (n - 1) // 2 if drop_nyquist else n // 2
        a = 2.0 * c[1:kmax + 1].real
        b = -2.0 * c[1:kmax + 1].imag
        if not drop_nyquist and n % 2 == 0:
            a[-1] *= 0.5
        return cls(c[0].real, a, b, period)

    @property
    def modes(self) -> int:
        return self.a.size

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    def __call__(self, s, deriv: int = 0):
        s = np.asarray(s, dtype=float)
        k = np.arange(1, self.modes + 1)
        phase = np.multiply.outer(s, k * self.omega) + deriv * np.pi / 2
        scale = (k * self.omega) ** deriv
        out = np.cos(phase) @ (scale * self.a) + np.sin(phase) @ (scale * self.b)
        if deriv == 0:
            out = out + self.a0
        return out

    def mean(self) -> float:
        return self.a0

    def integral(self) -> float:
        return self.a0 * self.period

    def tail(self, m: int = 4) -> float:
        """Largest coefficient magnitude among the last ``m`` modes."""
        amp = np.hypot(self.a, self.b)
        return float(amp[-m:].max()) if amp.size else 0.0

    def derivative(self, order: int = 1) -> "PeriodicSeries":
        k = np.arange(1, self.modes + 1) * self.omega
        a, b = self.a.copy(), self.b.copy()
        for _ in range(order):
            a, b = k * b, -k * a
        return PeriodicSeries(0.0, a, b, self.period)


def periodic_interp_matrix(n: int, period: float, s) -> np.ndarray:
    """Matrix mapping ``n`` uniform samples to trigonometric interpolant values at ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0  # drop Nyquist (tiny for resolved data)
    grid = np.arange(n) * period / n
    w = 2 * np.pi / period
    e = np.exp(1j * w * np.multiply.outer(s, k))  # (p, n)
    f = np.exp(-1j * w * np.multiply.outer(k, grid)) / n  # (n, n) DFT
    return (e @ f).real


def cheb(N: int):
    """Chebyshev-Gauss-Lobatto points ``x_j = cos(pi j / N)`` and the first
    and second differentiation matrices.

    Node differences use ``x_i - x_j = 2 sin((i+j) pi/2N) sin((j-i) pi/2N)``
    and diagonals come from the negative-sum trick, which keeps roundoff low
    for large ``N``.
    """
    if N == 0:
        return np.array([1.0]), np.zeros((1, 1)), np.zeros((1, 1))
    j = np.arange(N + 1)
    x = np.sin(np.pi * (N - 2 * j) / (2 * N))  # = cos(pi j / N), symmetric
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    I, J = np.meshgrid(j, j, indexing="ij")
    dX = 2 * np.sin(np.pi * (I + J) / (2 * N)) * np.sin(np.pi * (J - I) / (2 * N))
    np.fill_diagonal(dX, 1.0)
    Cq = np.outer(c, 1.0 / c)
    D = Cq / dX
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    # second derivative (Welfert / Weideman-Reddy recursion)
    D2 = 2 * (Cq * np.diag(D)[:, None] - D) / dX
    np.fill_diagonal(D2, 0.0)
    np.fill_diagonal(D2, -D2.sum(axis=1))
    return x, D, D2


class DiskRadial:
    """Radial discretization of the unit disk by Chebyshev points on [-1, 1].

    With an odd number ``N`` of Chebyshev intervals none of the ``N + 1``
    Lobatto points is 0, and the ``nr = (N + 1) / 2`` positive points
    ``r_0 = 1 > r_1 > ... > 0`` carry the unknowns.  A value at ``-r`` is the
    value at ``r`` with ``theta + pi``, so a radial derivative of a function
    with angular Fourier mode ``m`` folds the negative half with the sign
    ``(-1)**m``.
    """

    def __init__(self, nr: int):
        if nr < 2:
            raise ValueError("need at least two radial nodes")
        self.nr = nr
        self.N = 2 * nr - 1
        x, D, D2 = cheb(self.N)
        self.x = x
        self.D = D
        self.D2 = D2
        self.r = x[:nr].copy()
        # columns of the negative half, ordered like the positive nodes
        self._neg = self.N - np.arange(nr)
        self.weights = self._disk_weights()

    def split(self, M):
        """Split an operator acting on all ``N+1`` nodes into the parts acting
        on the positive nodes (same parity) and on the mirrored ones."""
        return M[:, :self.nr], M[:, self._neg]

    def folded(self, M, m_parity: int):
        same, opp = self.split(M)
        return same + (1 - 2 * (m_parity % 2)) * opp

    def _disk_weights(self):
        """Weights ``w_i`` with ``sum_i w_i f(r_i) = int_0^1 f(r) r dr`` for even ``f``.

        An even function is a polynomial in ``u = r**2``; integrate its
        interpolant in ``u`` (these nodes are Chebyshev-like in ``u``).
        """
        u = self.r ** 2
        n = self.nr
        # Chebyshev basis on [0, 1] in the variable 2u - 1
        V = np.polynomial.chebyshev.chebvander(2 * u - 1, n - 1)
        mom = np.zeros(n)
        for j in range(n):
            # int_0^1 T_j(2u-1) du = 0.5 int_{-1}^1 T_j(t) dt
            mom[j] = 0.0 if j % 2 else (0.5 * 2.0 / (1 - j * j))
        w_u = np.linalg.solve(V.T, mom)
        return 0.5 * w_u

    def interp_matrix(self, rq, m_parity: int):
        """Barycentric interpolation from the positive nodes to radii ``rq`` (|rq| <= 1)
        for a function of angular parity ``m_parity``."""
        rq = np.atleast_1d(np.asarray(rq))
        x = self.x
        N = self.N
        w = (-1.0) ** np.arange(N + 1)
        w[0] *= 0.5
        w[-1] *= 0.5
        diff = rq[:, None] - x[None, :]
        exact = np.isclose(diff, 0.0, atol=1e-15, rtol=0.0)
        diff = np.where(exact, 1.0, diff)
        terms = w / diff
        L = terms / terms.sum(axis=1, keepdims=True)
        rows = np.where(exact.any(axis=1))[0]
        for i in rows:
            L[i] = exact[i].astype(float)
        return self.folded(L, m_parity)
