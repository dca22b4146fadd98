"""Closed forms for a Cauchy-distributed ``x0``.

For the standard Cauchy law every object of the general pipeline has an
explicit expression in terms of the boundary height ``v = v_t(u)``, the
positive root of

    v u**2 = (1 + v)(t - v - v**2).

These functions depend on no quadrature and serve as the reference against
which the general-measure code is checked. ``loc`` and ``scale`` arguments use
the affine covariance ``x -> m + gamma x``: coordinates are mapped to
``(u - m)/gamma``, ``t`` to ``t/gamma**2``, heights scale by ``gamma`` and
planar densities by ``1/gamma**2``.
"""

from __future__ import annotations

import math

from .errors import NegativeSquare
from .roots import bisect


def _std(u, t, loc, scale):
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    return (u - loc) / scale, t / (scale * scale)


def peak_height(t: float) -> float:
    """``v_t(0) = (-1 + sqrt(1 + 4t)) / 2`` for the standard Cauchy law."""
    return 2.0 * t / (1.0 + math.sqrt(1.0 + 4.0 * t))


def cubic_residual(t: float, u: float, v: float) -> float:
    """``v u**2 - (1 + v)(t - v - v**2)``."""
    return v * u * u - (1.0 + v) * (t - v - v * v)


def _v_std(t, u):
    top = peak_height(t)
    if u == 0.0:
        return top
    return bisect(lambda v: -cubic_residual(t, u, v), 0.0, top)


def cauchy_v(t: float, u: float, loc: float = 0.0, scale: float = 1.0) -> float:
    """Boundary height ``v_t(u)`` by bisection on the cubic to float adjacency."""
    x, ts = _std(u, t, loc, scale)
    return scale * _v_std(ts, x)


def psi(t: float, u: float, loc: float = 0.0, scale: float = 1.0) -> float:
    """``psi_t(u) = u + u v / (1 + v)``."""
    x, ts = _std(u, t, loc, scale)
    v = _v_std(ts, x)
    return loc + scale * (x + x * v / (1.0 + v))


def psi_derivative(t: float, u: float, loc: float = 0.0, scale: float = 1.0) -> float:
    """``psi_t'(u) = (t + 4 v**2 (1+v)**2) / ((1+v)(t + 2 v**2 (1+v)))``."""
    x, ts = _std(u, t, loc, scale)
    v = _v_std(ts, x)
    return (ts + 4 * v * v * (1 + v) ** 2) / ((1 + v) * (ts + 2 * v * v * (1 + v)))


def f_map(alpha: float, beta: float, u0: float) -> float:
    """``f(u0) = u0 + ((alpha - beta)/s) u0 v / (1 + v)`` with ``v = v_s(u0)``."""
    s = alpha + beta
    v = _v_std(s, u0)
    return u0 + (alpha - beta) / s * u0 * v / (1.0 + v)


def f_map_derivative(alpha: float, beta: float, u0: float) -> float:
    """``f'(u0) = 1 + ((alpha - beta)/s)(psi_s'(u0) - 1)``."""
    s = alpha + beta
    return 1.0 + (alpha - beta) / s * (psi_derivative(s, u0) - 1.0)


def circular_density(t: float, u: float, loc: float = 0.0, scale: float = 1.0) -> float:
    """Brown density for ``alpha = beta = t/2``:
    ``(1/(2 pi t)) (t + 4 v**2 (1+v)**2) / ((1+v)(t + 2 v**2 (1+v)))``.
    """
    x, ts = _std(u, t, loc, scale)
    v = _v_std(ts, x)
    w = (ts + 4 * v * v * (1 + v) ** 2) / ((1 + v) * (ts + 2 * v * v * (1 + v))) / (2 * math.pi * ts)
    return w / (scale * scale)


def elliptic_peak(alpha: float, beta: float) -> float:
    """Largest height ``beta (-1 + sqrt(1 + 4s)) / s`` of the elliptic boundary."""
    s = alpha + beta
    return 4.0 * beta / (1.0 + math.sqrt(1.0 + 4.0 * s))


def elliptic_boundary_u2(alpha: float, beta: float, b: float) -> float:
    """``u**2`` of the boundary point at height ``b``:

    ``(b alpha + beta)**2 (4 beta**2 - 2 b beta - b**2 s) / (b beta**2 (b s + 2 beta))``.

    Raises
    ------
    NegativeSquare
        If ``b`` is above the peak height, where the numerator is negative.
    """
    s = alpha + beta
    if not b > 0:
        raise ValueError("b must be positive")
    num = 4 * beta * beta - 2 * b * beta - b * b * s
    if num < 0:
        if b <= elliptic_peak(alpha, beta) * (1 + 1e-12):
            return 0.0
        raise NegativeSquare(f"height {b!r} exceeds the peak {elliptic_peak(alpha, beta)!r}")
    return (b * alpha + beta) ** 2 * num / (b * beta * beta * (b * s + 2 * beta))


def elliptic_height(alpha: float, beta: float, u: float) -> float:
    """Height ``b`` of the elliptic boundary above ``u``; inverts :func:`elliptic_boundary_u2`."""
    top = elliptic_peak(alpha, beta)
    u2 = u * u
    if u2 == 0.0:
        return top

    def g(b):
        return elliptic_boundary_u2(alpha, beta, b) - u2 if b > 0 else math.inf

    return bisect(lambda b: -g(b), 0.0, top)


def elliptic_density(alpha: float, beta: float, u: float) -> float:
    """Brown density for general ``(alpha, beta)`` at horizontal coordinate ``u``:

    ``(1/(4 pi beta)) (b^4 s^3 + 4 b^3 s^2 beta + 4 b^2 s beta^2 + 4 beta^4)
    / (b^4 s^2 alpha + 4 b^3 s alpha beta + 4 b^2 alpha beta^2 + 4 b beta^4 + 4 beta^4)``
    with ``b`` the boundary height above ``u``.
    """
    s = alpha + beta
    b = elliptic_height(alpha, beta, u)
    num = b**4 * s**3 + 4 * b**3 * s**2 * beta + 4 * b**2 * s * beta**2 + 4 * beta**4
    den = (b**4 * s**2 * alpha + 4 * b**3 * s * alpha * beta + 4 * b**2 * alpha * beta**2
           + 4 * b * beta**4 + 4 * beta**4)
    return num / den / (4 * math.pi * beta)


def isigma_density(t: float, u: float) -> float:
    """Brown density for ``alpha = 0, beta = t``:
    ``(1/(4 pi t)) (4t + (1+u^2)^2) / ((1+u^2)^{3/2} sqrt(u^2 + 1 + 4t))``.
    """
    q = 1.0 + u * u
    return (4 * t + q * q) / (q ** 1.5 * math.sqrt(q + 4 * t)) / (4 * math.pi * t)


def isigma_phi(t: float, u: float) -> float:
    """Boundary half-height for ``alpha = 0, beta = t``:
    ``4t / (sqrt(u^2+1) (sqrt(u^2+1) + sqrt(u^2+1+4t)))``.
    """
    q = 1.0 + u * u
    return 4 * t / (math.sqrt(q) * (math.sqrt(q) + math.sqrt(q + 4 * t)))


def isigma_mass(t: float, cutoff: float = 1e3, panels: int = 200000) -> float:
    """``int 2 phi w du`` by composite Simpson on ``|u| <= cutoff`` plus the analytic tail.

    Beyond the cutoff ``phi ~ 2t/u^2`` and ``w ~ 1/(4 pi t)``, so
    ``2 phi w ~ 1/(pi u^2)``, whose two tails integrate to ``2/(pi cutoff)``;
    the next order is ``O(cutoff^-3)``.
    """
    import numpy as np

    x = np.linspace(0.0, cutoff, 2 * panels + 1)
    q = 1.0 + x * x
    phi = 4 * t / (np.sqrt(q) * (np.sqrt(q) + np.sqrt(q + 4 * t)))
    w = (4 * t + q * q) / (q ** 1.5 * np.sqrt(q + 4 * t)) / (4 * math.pi * t)
    y = 2 * phi * w
    h = x[1] - x[0]
    half = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
    return 2 * half + 2.0 / (math.pi * cutoff)


def spacing_zero(s: float):
    """Positive zero of ``f''`` for ``alpha != beta``.

    Returns ``(u0, v)`` where ``v`` solves ``4 v (1+v)(1 + 3 v (1+v)) = s`` and
    ``u0 = sqrt((1+v)(s - v - v^2)/v)``.
    """
    top = peak_height(s)
    v = bisect(lambda x: 4 * x * (1 + x) * (1 + 3 * x * (1 + x)) - s, 0.0, top)
    return math.sqrt((1 + v) * (s - v - v * v) / v), v
