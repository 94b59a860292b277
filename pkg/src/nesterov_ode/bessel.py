"""Bessel functions of the first kind, ``J_nu(u)`` for real ``nu >= 0, u >= 0``.

Below ``u = 12`` the ascending series is summed (40 terms).  Above, the
Hankel asymptotic expansion is used, truncated at its smallest term; at the
crossover that term is below 1e-10 for every ``nu <= 5``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_j1", "bessel_jnu", "bessel_ratio", "SERIES_CUTOFF"]

SERIES_CUTOFF = 12.0
SERIES_TERMS = 40
HANKEL_TERMS = 64


def _as_array(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise ValueError("Bessel argument must be nonnegative")
    return arr


def _ratio_series(nu, u):
    # sum_m (-1)^m Gamma(nu+1) (u/2)^{2m} / (m! Gamma(m+nu+1))
    q = -0.25 * u * u
    term = np.ones_like(u)
    total = np.ones_like(u)
    for m in range(1, SERIES_TERMS + 1):
        term = term * q / (m * (m + nu))
        total = total + term
    return total


def _hankel(nu, u):
    mu4 = 4.0 * nu * nu
    c = np.empty((HANKEL_TERMS + 1,) + u.shape)
    c[0] = 1.0
    for k in range(1, HANKEL_TERMS + 1):
        c[k] = c[k - 1] * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * u)
    # stop at the smallest term of the divergent series
    stop = np.argmin(np.abs(c), axis=0)
    k = np.arange(HANKEL_TERMS + 1).reshape((-1,) + (1,) * u.ndim)
    use = k < np.maximum(stop, 1)
    sign = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    even = (k % 2 == 0) & use
    odd = (k % 2 == 1) & use
    P = np.sum(np.where(even, sign * c, 0.0), axis=0)
    Q = np.sum(np.where(odd, sign * c, 0.0), axis=0)
    omega = u - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * u)) * (P * np.cos(omega) - Q * np.sin(omega))


def bessel_jnu(nu, u):
    """``J_nu(u)``; accepts scalars or arrays for ``u``."""
    nu = float(nu)
    if nu < 0:
        raise ValueError("order must be nonnegative")
    arr = _as_array(u)
    out = np.empty_like(arr)
    small = arr < SERIES_CUTOFF
    if np.any(small):
        us = arr[small]
        out[small] = _ratio_series(nu, us) * (0.5 * us) ** nu / math.gamma(nu + 1.0)
    if np.any(~small):
        out[~small] = _hankel(nu, arr[~small])
    return float(out) if out.ndim == 0 else out


def bessel_j1(u):
    return bessel_jnu(1.0, u)


def bessel_ratio(nu, u):
    """``2^nu Gamma(nu+1) J_nu(u) / u^nu``, equal to 1 at ``u = 0``."""
    nu = float(nu)
    arr = _as_array(u)
    out = np.empty_like(arr)
    small = arr < SERIES_CUTOFF
    if np.any(small):
        out[small] = _ratio_series(nu, arr[small])
    if np.any(~small):
        ul = arr[~small]
        out[~small] = (2.0 ** nu * math.gamma(nu + 1.0)) * _hankel(nu, ul) / ul ** nu
    return float(out) if out.ndim == 0 else out
