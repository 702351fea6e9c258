"""Green's function ``G(x) = cos(lam |x|) / (4 pi |x|)`` of ``Delta + lam^2``
and its Cartesian derivatives up to third order, in closed form.

For a radial function ``f(r)`` with ``a = f'' - f'/r`` and ``b = f'/r``:

    d_i f      = f' xh_i
    d_ij f     = a xh_i xh_j + b delta_ij
    d_ijk f    = a' xh_i xh_j xh_k + b' xh_k delta_ij
                 + (a / r) (delta_ik xh_j + delta_jk xh_i - 2 xh_i xh_j xh_k)

with ``a' = f''' - f''/r + f'/r^2`` and ``b' = f''/r - f'/r^2``.
"""

from __future__ import annotations

import numpy as np

from ..errors import AtSingularity

EXCLUSION_RADIUS = 1e-8
_I3 = np.eye(3)


def _radial(r, lam):
    """``f, f', f'', f'''`` for ``f = cos(lam r) / (4 pi r)``."""
    c, s = np.cos(lam * r), np.sin(lam * r)
    k = 1.0 / (4 * np.pi)
    f0 = k * c / r
    f1 = k * (-lam * s / r - c / r ** 2)
    f2 = k * (-lam ** 2 * c / r + 2 * lam * s / r ** 2 + 2 * c / r ** 3)
    f3 = k * (lam ** 3 * s / r + 3 * lam ** 2 * c / r ** 2 - 6 * lam * s / r ** 3 - 6 * c / r ** 4)
    return f0, f1, f2, f3


def _check(r, exclusion):
    if np.any(r < exclusion):
        raise AtSingularity(f"evaluation within {exclusion:g} of a source")


def greens(x, lam: float, exclusion: float = EXCLUSION_RADIUS):
    """``G(x)`` for points ``x`` of shape ``(..., 3)``.

    Raises
    ------
    AtSingularity
        If ``|x| < exclusion``.
    """
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    _check(r, exclusion)
    return np.cos(lam * r) / (4 * np.pi * r)


def greens_derivatives(x, lam: float, order: int = 2, exclusion: float = EXCLUSION_RADIUS):
    """``[G, grad G, Hess G, D^3 G]`` truncated at ``order`` (shapes ``(...)``,
    ``(..., 3)``, ``(..., 3, 3)``, ``(..., 3, 3, 3)``)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    _check(r, exclusion)
    f0, f1, f2, f3 = _radial(r, lam)
    out = [f0]
    if order == 0:
        return out
    xh = x / r[..., None]
    out.append(f1[..., None] * xh)
    if order == 1:
        return out
    a = f2 - f1 / r
    b = f1 / r
    xx = xh[..., :, None] * xh[..., None, :]
    out.append(a[..., None, None] * xx + b[..., None, None] * _I3)
    if order == 2:
        return out
    a1 = f3 - f2 / r + f1 / r ** 2
    b1 = f2 / r - f1 / r ** 2
    xxx = xx[..., None] * xh[..., None, None, :]
    dx = np.einsum("ik,...j->...ijk", _I3, xh)  # delta_ik xh_j
    dy = np.einsum("jk,...i->...ijk", _I3, xh)  # delta_jk xh_i
    dz = np.einsum("ij,...k->...ijk", _I3, xh)  # delta_ij xh_k
    T = (a1[..., None, None, None] * xxx + b1[..., None, None, None] * dz
         + (a / r)[..., None, None, None] * (dx + dy - 2 * xxx))
    out.append(T)
    return out


def radial_helmholtz_defect(r, lam: float) -> np.ndarray:
    """``(r G)'' + lam^2 (r G)`` from the closed-form derivatives (should vanish)."""
    _, f1, f2, _ = _radial(np.asarray(r, dtype=float), lam)
    f0 = np.cos(lam * r) / (4 * np.pi * r)
    # (r f)'' = r f'' + 2 f'
    return r * f2 + 2 * f1 + lam ** 2 * r * f0
