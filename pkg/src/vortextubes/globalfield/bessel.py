"""Regular solutions ``j_l(lam r) Y_lm`` of the Helmholtz equation with closed-form
Cartesian derivatives up to third order.

Conventions
-----------
Solid harmonics ``Phi_l^m(x) = r^l P_l^m(cos theta) e^{i m phi} / (l + m)!``
(Condon-Shortley phase, ``Phi_l^{-m} = (-1)^m conj(Phi_l^m)``) satisfy

    d_z Phi_l^m = Phi_{l-1}^m,
    (d_x + i d_y) Phi_l^m = Phi_{l-1}^{m+1},
    (d_x - i d_y) Phi_l^m = -Phi_{l-1}^{m-1},

so every derivative is an index shift.  The real basis uses
``g = c_m sqrt((l-m)! (l+m)!) Re/Im Phi_l^m`` (``c_0 = 1``, ``c_m = sqrt 2``),
which equals ``sqrt(4 pi / (2l+1)) r^l Y_lm`` up to sign, and the radial factor
``qh_l(t) = (2l+1)!! j_l(t) / t^l`` (an entire function of ``t^2`` with
``qh_l(0) = 1`` and ``d/dx qh_l(lam r) = -lam^2 x qh_{l+1}(lam r) / (2l+3)``).
A basis function is ``f = qh_l(lam r) g(x)``; coordinates are centered and
scaled by ``(center, scale)`` so that the fitting region is the unit ball.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gammaln, spherical_jn


# ---------------------------------------------------------------------------
# radial factor
# ---------------------------------------------------------------------------

def _log_double_factorial_odd(l):
    """``log (2l+1)!!``."""
    l = np.asarray(l, dtype=float)
    return gammaln(2 * l + 2) - l * np.log(2.0) - gammaln(l + 1)


def qhat(l_max: int, t) -> np.ndarray:
    """``(2l+1)!! j_l(t) / t^l`` for ``l = 0..l_max`` (shape ``(l_max+1,) + t.shape``).

    Uses the power series ``sum_k (-t^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))``
    while ``t^2 <= 2 (2l + 3)`` (little cancellation, no underflow for tiny
    ``t``) and ``scipy.special.spherical_jn`` beyond.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((l_max + 1,) + t.shape)
    t2 = t * t
    for l in range(l_max + 1):
        small = t2 <= 2 * (2 * l + 3)
        res = np.empty(t.shape)
        if np.any(small):
            ts = -0.5 * t2[small]
            term = np.ones_like(ts)
            acc = np.ones_like(ts)
            for k in range(1, 200):
                term = term * ts / (k * (2 * l + 2 * k + 1))
                acc = acc + term
                if np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
                    break
            res[small] = acc
        big = ~small
        if np.any(big):
            tb = t[big]
            logscale = _log_double_factorial_odd(l) - l * np.log(tb)
            res[big] = spherical_jn(l, tb) * np.exp(logscale)
        out[l] = res
    return out


def spherical_j(l_max: int, t) -> np.ndarray:
    """``j_l(t)`` for ``l = 0..l_max`` via :func:`qhat` (accurate for tiny ``t``)."""
    t = np.asarray(t, dtype=float)
    q = qhat(l_max, t)
    l = np.arange(l_max + 1).reshape((-1,) + (1,) * t.ndim)
    with np.errstate(divide="ignore"):
        logt = np.log(np.abs(t))
    scale = np.exp(l * logt - _log_double_factorial_odd(l))
    scale = np.where(t == 0, (l == 0).astype(float), scale)
    return q * scale


# ---------------------------------------------------------------------------
# solid harmonics and their derivatives
# ---------------------------------------------------------------------------

def solid_harmonics(x, L: int) -> np.ndarray:
    """Complex ``Phi_l^m(x)`` for ``0 <= l <= L``, ``-L <= m <= L`` (zero for
    ``|m| > l``); shape ``(L+1, 2L+1, n)`` with ``m`` stored at index ``m + L``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    X, Y, Z = x[:, 0], x[:, 1], x[:, 2]
    r2 = X * X + Y * Y + Z * Z
    P = np.zeros((L + 1, 2 * L + 1, n), dtype=complex)
    P[0, L] = 1.0
    xp = X + 1j * Y
    for m in range(0, L + 1):
        if m > 0:
            P[m, L + m] = -xp * P[m - 1, L + m - 1] / (2 * m)
        for l in range(m + 1, L + 1):
            prev2 = P[l - 2, L + m] if l - 2 >= m else 0.0
            P[l, L + m] = ((2 * l - 1) * Z * P[l - 1, L + m] - r2 * prev2) / ((l + m) * (l - m))
    for m in range(1, L + 1):
        P[:, L - m] = (-1) ** m * np.conj(P[:, L + m])
    return P


def _shift(P, dl, dm):
    """``out[l, m] = P[l + dl, m + dm]`` with zeros outside the table."""
    out = np.zeros_like(P)
    L1, M1 = P.shape[:2]
    ls = slice(max(0, -dl), min(L1, L1 - dl))
    ms = slice(max(0, -dm), min(M1, M1 - dm))
    ls_src = slice(ls.start + dl, ls.stop + dl)
    ms_src = slice(ms.start + dm, ms.stop + dm)
    out[ls, ms] = P[ls_src, ms_src]
    return out


def _d(P, axis):
    """Derivative of the whole table along Cartesian ``axis`` (0, 1, 2).

    ``P`` holds ``Phi`` at degree index ``l``; the derivative of degree ``l``
    lives at degree ``l - 1``, so the result at ``[l, m]`` is
    ``d Phi_{l}^{m}`` expressed through ``P[l - 1]``.
    """
    if axis == 2:
        return _shift(P, -1, 0)
    plus = _shift(P, -1, +1)     # Phi_{l-1}^{m+1}
    minus = -_shift(P, -1, -1)   # -Phi_{l-1}^{m-1}
    if axis == 0:
        return 0.5 * (plus + minus)
    return (plus - minus) / 2j


@lru_cache(maxsize=None)
def real_index(L: int):
    """``(l, m, part)`` rows of the real basis (``part`` 0 = Re, 1 = Im)."""
    rows = []
    for l in range(L + 1):
        rows.append((l, 0, 0))
        for m in range(1, l + 1):
            rows.append((l, m, 0))
            rows.append((l, m, 1))
    return tuple(rows)


def _real_parts(T, L):
    """Map a complex table ``(L+1, 2L+1, ...)`` to normalized real basis rows."""
    idx = real_index(L)
    ls = np.array([i[0] for i in idx])
    ms = np.array([i[1] for i in idx])
    part = np.array([i[2] for i in idx])
    norm = np.exp(0.5 * (gammaln(ls - ms + 1) + gammaln(ls + ms + 1)))
    norm = norm * np.where(ms > 0, np.sqrt(2.0), 1.0)
    vals = T[ls, L + ms]
    out = np.where(part.reshape((-1,) + (1,) * (vals.ndim - 1)) == 0, vals.real, vals.imag)
    return out * norm.reshape((-1,) + (1,) * (vals.ndim - 1))


def real_solid_derivatives(x, L: int, order: int = 0):
    """Real normalized solid harmonics ``g`` and their derivatives.

    Returns a list ``[g, Dg, D2g, D3g][:order+1]`` with shapes ``(nb, n)``,
    ``(nb, n, 3)``, ``(nb, n, 3, 3)``, ``(nb, n, 3, 3, 3)``.
    """
    P = solid_harmonics(x, L)
    out = [_real_parts(P, L)]
    if order == 0:
        return out
    D1 = [_d(P, a) for a in range(3)]
    out.append(np.stack([_real_parts(D1[a], L) for a in range(3)], -1))
    if order == 1:
        return out
    D2 = [[_d(D1[a], b) for b in range(3)] for a in range(3)]
    out.append(np.stack([np.stack([_real_parts(D2[a][b], L) for b in range(3)], -1)
                         for a in range(3)], -2))
    if order == 2:
        return out
    D3 = np.stack([np.stack([np.stack([_real_parts(_d(D2[a][b], c), L) for c in range(3)], -1)
                             for b in range(3)], -2) for a in range(3)], -3)
    out.append(D3)
    return out


# ---------------------------------------------------------------------------
# scalar basis f = qh_l(lam r) g(x)
# ---------------------------------------------------------------------------

def _sym_outer(a, b):
    return a[..., :, None] * b[..., None, :] + b[..., :, None] * a[..., None, :]


def helmholtz_basis(x, L: int, lam: float, order: int = 2):
    """Real Helmholtz basis ``f_b`` (``b`` over :func:`real_index`) and its
    derivatives at points ``x`` (already centered/scaled).

    Returns ``[f, Df, D2f, D3f][:order+1]`` with the shapes of
    :func:`real_solid_derivatives`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    r = np.linalg.norm(x, axis=1)
    idx = real_index(L)
    ls = np.array([i[0] for i in idx])
    G = real_solid_derivatives(x, L, order)
    Q = qhat(L + order, lam * r)  # (L+order+1, n)
    # Q_k for each basis row: qh_{l+k}(lam r);  mu_k = -lam^2 / (2(l+k)+3)
    Qk = [Q[ls + k] for k in range(order + 1)]  # each (nb, n)
    mu = [(-lam ** 2 / (2 * (ls + k) + 3))[:, None] for k in range(order)]
    g = G[0]
    out = [Qk[0] * g]
    if order == 0:
        return out
    xv = np.broadcast_to(x, (len(idx), n, 3))
    g1 = G[1]
    f1 = Qk[0][..., None] * g1 + (mu[0] * Qk[1] * g)[..., None] * xv
    out.append(f1)
    if order == 1:
        return out
    I3 = np.eye(3)
    g2 = G[2]
    xx = xv[..., :, None] * xv[..., None, :]
    m0q1 = (mu[0] * Qk[1])[..., None, None]
    m01q2 = (mu[0] * mu[1] * Qk[2])[..., None, None]
    f2 = (Qk[0][..., None, None] * g2 + m0q1 * (_sym_outer(g1, xv) + g[..., None, None] * I3)
          + m01q2 * g[..., None, None] * xx)
    out.append(f2)
    if order == 2:
        return out
    g3 = G[3]
    m012q3 = (mu[0] * mu[1] * mu[2] * Qk[3])[..., None, None, None]
    q0 = Qk[0][..., None, None, None]
    m0q1_3 = m0q1[..., None]
    m01q2_3 = m01q2[..., None]
    gs = g[..., None, None, None]
    # d_k of f2_ij
    t1 = q0 * g3 + m0q1_3 * g2[..., :, :, None] * xv[..., None, None, :]
    # d_k [g_i x_j + g_j x_i + g delta_ij]
    A = (g2[..., :, None, :] * xv[..., None, :, None]          # g_ik x_j
         + g1[..., :, None, None] * I3[None, None, None, :, :]  # g_i delta_jk
         + g2[..., None, :, :] * xv[..., :, None, None]        # g_jk x_i
         + g1[..., None, :, None] * I3[None, None, :, None, :]  # g_j delta_ik
         + g1[..., None, None, :] * I3[None, None, :, :, None])  # g_k delta_ij
    S1 = _sym_outer(g1, xv) + g[..., None, None] * I3
    t2 = m0q1_3 * A + m01q2_3 * S1[..., None] * xv[..., None, None, :]
    B = (g1[..., None, None, :] * xx[..., None]
         + gs * (I3[None, None, :, None, :] * xv[..., None, :, None]
                 + xv[..., :, None, None] * I3[None, None, None, :, :]))
    t3 = m01q2_3 * B + m012q3 * gs * xx[..., None] * xv[..., None, None, :]
    out.append(t1 + t2 + t3)
    return out
