"""Smooth cutoff: identically 1 on ``|xi| <= 1.1``, identically 0 on ``|xi| >= 1.9``.

The transition is the standard ``exp(-1/t)`` gluing, written in the overflow-safe
logistic form ``psi(t) = 1 / (1 + exp(1/t - 1/(1-t)))`` with
``t = (1.9 - |xi|) / 0.8``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import expit

PLATEAU = 1.1
SUPPORT = 1.9
_WIDTH = SUPPORT - PLATEAU
# psi and its derivatives are below 1e-80 within this distance of the endpoints
_EDGE = 5e-3
MAX_DERIVATIVE = 8


@lru_cache(maxsize=None)
def _logistic_polys():
    """``S^(k)`` as a polynomial in ``S`` for ``S(z) = 1 / (1 + e^z)``; uses ``S' = S^2 - S``."""
    polys = [P.Polynomial([0.0, 1.0])]
    for _ in range(MAX_DERIVATIVE):
        polys.append(polys[-1].deriv() * P.Polynomial([0.0, -1.0, 1.0]))
    return polys


def _psi_series(t, order):
    """Taylor coefficients ``psi^(k)(t) / k!`` for ``k <= order`` (shape ``(order+1, n)``)."""
    n = order + 1
    k = np.arange(n)[:, None]
    # g(t) = 1/t - 1/(1-t); g^(k)/k! = (-1)^k / t^(k+1) - 1 / (1-t)^(k+1)
    g = (-1.0) ** k / t ** (k + 1) - 1.0 / (1.0 - t) ** (k + 1)
    s0 = expit(-g[0])
    fact = np.cumprod(np.r_[1.0, np.arange(1, n)])
    s_coef = [_logistic_polys()[j](s0) / fact[j] for j in range(n)]
    delta = g.copy()
    delta[0] = 0.0
    out = np.zeros_like(g)
    out[0] = s_coef[0]
    power = np.zeros_like(g)
    power[0] = 1.0
    for j in range(1, n):
        power = _series_mul(power, delta)
        out += s_coef[j] * power
    return out


def _series_mul(a, b):
    n = a.shape[0]
    c = np.zeros_like(a)
    for i in range(n):
        c[i:] += a[i] * b[: n - i]
    return c


def _psi(t, k):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if k == 0:
        out[t >= 1 - _EDGE] = 1.0
    inside = (t > _EDGE) & (t < 1 - _EDGE)
    if np.any(inside):
        series = _psi_series(t[inside], k)
        out[inside] = series[k] * math.factorial(k)
    return out


def chi(xi, k: int = 0):
    """k-th derivative of the cutoff profile, evaluated elementwise."""
    if k > MAX_DERIVATIVE:
        raise ValueError(f"cutoff derivatives implemented up to order {MAX_DERIVATIVE}")
    xi = np.asarray(xi, dtype=float)
    t = (SUPPORT - np.abs(xi)) / _WIDTH
    val = _psi(t, k)
    if k:
        val = val * (-np.sign(xi) / _WIDTH) ** k
    return val


def chi_eps(xi, eps: float):
    """Rescaled cutoff ``chi(xi / eps)``."""
    return chi(np.asarray(xi, dtype=float) / eps)


def chi_composite_derivatives(y_derivs, order: int):
    """Derivatives of ``chi(y(xi))`` up to ``order`` <= 4 via Faa di Bruno.

    ``y_derivs`` is ``[y, y', y'', y''', y'''']`` (arrays of a common shape).
    """
    if order > 4:
        raise ValueError("composite cutoff derivatives implemented up to order 4")
    y, y1, y2, y3, y4 = y_derivs
    c = [chi(y, k) for k in range(order + 1)]
    out = [c[0]]
    if order >= 1:
        out.append(c[1] * y1)
    if order >= 2:
        out.append(c[2] * y1 ** 2 + c[1] * y2)
    if order >= 3:
        out.append(c[3] * y1 ** 3 + 3 * c[2] * y1 * y2 + c[1] * y3)
    if order >= 4:
        out.append(c[4] * y1 ** 4 + 6 * c[3] * y1 ** 2 * y2
                   + c[2] * (3 * y2 ** 2 + 4 * y1 * y3) + c[1] * y4)
    return out
