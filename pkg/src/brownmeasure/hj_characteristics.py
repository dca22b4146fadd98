"""Closed-form characteristics of the Hamilton-Jacobi equation for ``S(t, lambda, eps)``.

``S(0, lambda, eps) = int log(|x - lambda|**2 + eps) dmu(x)`` and the
Hamiltonian is

    H(u, v, eps, p_u, p_v, p_eps) = -(p_u**2 - p_v**2)/4 - eps p_eps**2.

Starting from ``(lambda0, eps0)`` with initial momenta taken from the gradient
of ``S(0, .)``, the momenta ``p_u, p_v`` stay constant, ``u`` and ``v`` move
linearly, and ``eps`` shrinks as ``eps0 (1 - t p0)**2`` until it vanishes at
the lifetime ``t* = 1/p0``. Along a path ``S`` grows linearly with slope
``H``, which is conserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BeyondLifetime, OutsideLambdaClosure
from .measure_core import MeasureSpec, kernel_bundle, log_energy
from .subordination import h_map, i0_at_axis, v_t

BOUNDARY_BAND = 1e-9


@dataclass(frozen=True)
class CharacteristicState:
    t: float
    u: float
    v: float
    eps: float
    p_u: float
    p_v: float
    p_eps: float
    # eps * p_eps**2 is constant along a path; kept for the limit at t*
    eps_p_eps_sq: float = math.nan

    @property
    def lam(self):
        return complex(self.u, self.v)

    def as_row(self):
        return (self.t, self.u, self.v, self.eps, self.p_u, self.p_v, self.p_eps)


@dataclass(frozen=True)
class HJValue:
    s_value: float
    h0: float


def _check_eps0(eps0):
    eps0 = float(eps0)
    if not (math.isfinite(eps0) and eps0 > 0):
        raise ValueError(f"eps0 must be positive, got {eps0!r}")
    return eps0


def initial_momenta(measure: MeasureSpec, lam0: complex, eps0: float):
    """``(p_u0, p_v0, p0)`` = ``(2 i1, 2 v0 i0, i0)`` with ``D = (u0-x)^2 + v0^2 + eps0``.

    These are the partial derivatives of ``S(0, lambda0, eps0)`` in ``u``, ``v``
    and ``eps``.
    """
    lam0 = complex(lam0)
    eps0 = _check_eps0(eps0)
    kb = kernel_bundle(measure, lam0.real, lam0.imag, eps0)
    return 2.0 * float(kb.i1), 2.0 * lam0.imag * float(kb.i0), float(kb.i0)


def lifetime_tstar(measure: MeasureSpec, lam0: complex, eps0: float) -> float:
    """``t* = 1/p0``, the time at which ``eps`` reaches zero."""
    return 1.0 / initial_momenta(measure, lam0, eps0)[2]


def T_limit(measure: MeasureSpec, lam0: complex) -> float:
    """``T(lambda0) = 1 / int dmu(x)/((u0-x)^2 + v0^2)``, the ``eps0 -> 0`` lifetime.

    The value is 0 where the integral diverges (``v0 = 0`` on the support).
    ``lambda0`` lies in ``Lambda_t`` exactly when ``T(lambda0) < t``.
    """
    lam0 = complex(lam0)
    if lam0.imag == 0.0:
        return 1.0 / i0_at_axis(measure, lam0.real)
    return 1.0 / float(kernel_bundle(measure, lam0.real, lam0.imag).i0)


def hamiltonian(state: CharacteristicState) -> float:
    """``-(p_u^2 - p_v^2)/4 - eps p_eps^2``; at ``t*`` the last term is its limit."""
    kinetic = -0.25 * (state.p_u * state.p_u - state.p_v * state.p_v)
    if math.isinf(state.p_eps):
        return kinetic - state.eps_p_eps_sq
    return kinetic - state.eps * state.p_eps * state.p_eps


def flow(measure: MeasureSpec, lam0: complex, eps0: float, t: float) -> CharacteristicState:
    """State at time ``t`` of the characteristic from ``(lambda0, eps0)``.

    Raises
    ------
    BeyondLifetime
        If ``t > t*``. At ``t = t*`` the state has ``eps = 0`` exactly and
        ``p_eps = inf``.
    """
    lam0 = complex(lam0)
    p_u0, p_v0, p0 = initial_momenta(measure, lam0, eps0)
    return _flow(lam0, float(eps0), p_u0, p_v0, p0, float(t))


def _flow(lam0, eps0, p_u0, p_v0, p0, t):
    if t < 0:
        raise ValueError("t must be nonnegative")
    tstar = 1.0 / p0
    if t > tstar:
        raise BeyondLifetime(f"t={t!r} exceeds the lifetime t*={tstar!r}")
    # the same factor k = 1 - t p0 in eps and p_eps keeps eps p_eps^2 = eps0 p0^2 to rounding
    k = (tstar - t) / tstar
    u = lam0.real - 0.5 * t * p_u0
    v = lam0.imag + 0.5 * t * p_v0
    eps = eps0 * k * k
    p_eps = p0 / k if k > 0 else math.inf
    return CharacteristicState(t, u, v, eps, p_u0, p_v0, p_eps, eps0 * p0 * p0)


def path(measure: MeasureSpec, lam0: complex, eps0: float, times) -> list:
    """States at several times, sharing one kernel evaluation."""
    lam0 = complex(lam0)
    p_u0, p_v0, p0 = initial_momenta(measure, lam0, eps0)
    return [_flow(lam0, float(eps0), p_u0, p_v0, p0, float(t)) for t in times]


def epsilon0_t(measure: MeasureSpec, t: float, lam0: complex) -> float:
    """``v_t(u0)^2 - v0^2``: the ``eps0`` whose characteristic ends exactly at time ``t``.

    Raises
    ------
    OutsideLambdaClosure
        If ``|v0| > v_t(u0)``.
    """
    lam0 = complex(lam0)
    v = v_t(measure, t, lam0.real).v
    if abs(lam0.imag) > v + BOUNDARY_BAND:
        raise OutsideLambdaClosure(f"{lam0!r} is outside the closure of Lambda_t (v_t = {v:.6g})")
    return max(v * v - lam0.imag * lam0.imag, 0.0)


def terminal_position(measure: MeasureSpec, t: float, lam0: complex) -> complex:
    """Where ``lambda(t)`` lands as ``eps0`` tends to the value exhausting the lifetime at ``t``.

    Outside ``Lambda_t`` this is ``lambda0 - t G(lambda0)``. Inside it is
    ``t p1 + 2 i v0`` with ``p1 = int x dmu / ((u0-x)^2 + v_t(u0)^2)``.
    """
    lam0 = complex(lam0)
    v = v_t(measure, t, lam0.real).v
    if abs(lam0.imag) < v + BOUNDARY_BAND and v > 0:
        eps = max(v * v - lam0.imag * lam0.imag, 0.0)
        p1 = float(kernel_bundle(measure, lam0.real, lam0.imag, eps).ix)
        return complex(t * p1, 2.0 * lam0.imag)
    return h_map(measure, -t, lam0)


def hj_value(measure: MeasureSpec, lam0: complex, eps0: float, t: float) -> HJValue:
    """``S(t, lambda(t), eps(t)) = S(0, lambda0, eps0) + t H0``."""
    lam0 = complex(lam0)
    p_u0, p_v0, p0 = initial_momenta(measure, lam0, eps0)
    if t > 1.0 / p0:
        raise BeyondLifetime(f"t={t!r} exceeds the lifetime t*={1.0 / p0!r}")
    h0 = -0.25 * (p_u0 * p_u0 - p_v0 * p_v0) - eps0 * p0 * p0
    return HJValue(log_energy(measure, lam0, eps0) + t * h0, h0)
