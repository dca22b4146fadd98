"""Brown measure of ``x0 + c_{alpha,beta}`` from the law of ``x0``.

With ``s = alpha + beta`` and ``r = alpha - beta``, a point ``u0`` of the real
line is sent to

    f(u0) = u0 + r i1(u0, v_s(u0)),

and the Brown measure lives on ``Omega = {u + iv : |v| < phi(u)}`` with
``phi(u) = (2 beta / s) v_s(f^-1(u))``. Its density is constant on vertical
segments,

    w(u) = (1 / (4 pi beta)) (1 + 2 beta g / (1 + r g)),

where ``g = d/du0 i1(u0, v_s(u0))`` is the total derivative along the
boundary of ``Lambda_s``. The circular case ``alpha = beta`` has ``f`` equal to
the identity and ``w = psi_s' / (2 pi s)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .errors import BracketFailure, OutsideDomain, OutsideLambda, OutsideOmega, SingularBrownMeasure
from .measure_core import MeasureSpec, cauchy_transform
from .roots import bisect, safeguarded_newton
from .subordination import (
    FlowPoint,
    SupportComponents,
    component_nodes,
    kernel_slope,
    support_components,
    v_t,
)

INVERSE_RTOL = 1e-11
BOUNDARY_TOL = 1e-9
FD_STEP = 1e-4


@dataclass(frozen=True)
class EllipticParams:
    """Variances of the elliptic element: ``alpha >= 0`` real part, ``beta > 0`` imaginary part."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("alpha and beta must be finite")
        if a < 0:
            raise ValueError(f"alpha must be nonnegative, got {a}")
        if not b > 0:
            raise ValueError(f"beta must be positive, got {b}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def s(self):
        return self.alpha + self.beta

    @property
    def r(self):
        return self.alpha - self.beta

    @property
    def height_ratio(self):
        """``2 beta / s``, the vertical scale from ``Lambda_s`` to ``Omega``."""
        return 2.0 * self.beta / self.s

    @classmethod
    def circular(cls, s):
        return cls(0.5 * s, 0.5 * s)

    @classmethod
    def imaginary(cls, t):
        return cls(0.0, t)

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta}


def _i1_on_boundary(measure, fp):
    if fp.v == 0.0:
        return cauchy_transform(measure, fp.u).real
    return fp.kernel.i1


def _point(measure, p, u0, guess=None):
    return v_t(measure, p.s, u0, v_guess=guess)


def f_ab(measure: MeasureSpec, p: EllipticParams, u0: float) -> float:
    """Boundary map ``f(u0) = u0 + r i1(u0, v_s(u0))``; the identity when ``alpha == beta``."""
    if p.r == 0.0:
        return float(u0)
    return float(u0) + p.r * _i1_on_boundary(measure, _point(measure, p, u0))


def f_ab_derivative(measure: MeasureSpec, p: EllipticParams, u0: float,
                    point: Optional[FlowPoint] = None) -> float:
    """``f'(u0) = 1 + r g(u0)``."""
    fp = point if point is not None else _point(measure, p, u0)
    return 1.0 + p.r * kernel_slope(measure, fp)


def _inverse(measure, p, u, guess=None):
    """Solve ``f(u0) = u``; returns ``(u0, FlowPoint at u0)``."""
    u = float(u)
    if p.r == 0.0:
        return u, _point(measure, p, u)
    cache = {}

    def F(x):
        fp = _point(measure, p, x, guess=cache.get("v"))
        if fp.v > 0:
            cache["v"] = fp.v
        cache[x] = fp
        val = x + p.r * _i1_on_boundary(measure, fp) - u
        return val, 1.0 + p.r * kernel_slope(measure, fp)

    # |i1| <= sqrt(i0) <= 1/sqrt(s) on the boundary of Lambda_s and off it, so
    # f(u0) - u0 lies in [-B, B] with B = |r|/sqrt(s) and [u - B, u + B]
    # brackets the root without evaluating its ends.
    half = abs(p.r) / math.sqrt(p.s) * (1.0 + 1e-9) + 1e-12 * max(1.0, abs(u))
    ftol = INVERSE_RTOL * max(1.0, abs(u))
    x0 = u if guess is None else guess
    u0 = safeguarded_newton(F, u - half, u + half, x0=x0, xtol=0.0, rtol=1e-15, ftol=ftol,
                            f_lo=-1.0, f_hi=1.0)
    if u0 not in cache:
        F(u0)
    fp = cache[u0]
    if abs(u0 + p.r * _i1_on_boundary(measure, fp) - u) > ftol:
        raise BracketFailure(f"f^-1({u!r}) did not converge inside its a priori bracket")
    return u0, fp


def f_ab_inverse(measure: MeasureSpec, p: EllipticParams, u: float) -> float:
    """``f^-1(u)`` by bracketed Newton, with ``|f(u0) - u| <= 1e-11 max(1, |u|)``."""
    return _inverse(measure, p, u)[0]


def phi_ab(measure: MeasureSpec, p: EllipticParams, u: float) -> float:
    """Half-height of ``Omega`` above ``u``: ``(2 beta / s) v_s(f^-1(u))``."""
    _, fp = _inverse(measure, p, u)
    return p.height_ratio * fp.v


SINGULAR_SLOPE = 1e-12


def _density_from_slope(p, g):
    fprime = 1.0 + p.r * g
    if not fprime > SINGULAR_SLOPE:
        # only a Dirac input with alpha = 0 collapses Omega onto a segment
        raise SingularBrownMeasure(f"f' = {fprime:.3e}; the Brown measure is carried by a segment")
    return (1.0 + 2.0 * p.beta * g / (1.0 + p.r * g)) / (4.0 * math.pi * p.beta)


@dataclass(frozen=True)
class BoundarySample:
    """Everything known at one ``u0`` of ``Lambda_s``."""

    u0: float
    u: float
    v: float
    phi: float
    w: float
    slope: float


def sample_at(measure: MeasureSpec, p: EllipticParams, u0: float, guess=None) -> BoundarySample:
    """Evaluate ``f``, ``phi`` and ``w`` at the preimage point ``u0``.

    ``w`` is NaN where ``v_s(u0) = 0`` (outside ``Lambda_s`` or at an endpoint).
    """
    fp = _point(measure, p, u0, guess)
    u = float(u0) + p.r * _i1_on_boundary(measure, fp)
    if fp.v == 0.0:
        return BoundarySample(float(u0), u, 0.0, 0.0, math.nan, math.nan)
    g = kernel_slope(measure, fp)
    return BoundarySample(float(u0), u, fp.v, p.height_ratio * fp.v, _density_from_slope(p, g), g)


def brown_density(measure: MeasureSpec, p: EllipticParams, u: float) -> float:
    """Brown density on the vertical segment of ``Omega`` above ``u``.

    Raises
    ------
    OutsideDomain
        If ``phi(u) = 0``.
    """
    u0, fp = _inverse(measure, p, u)
    if fp.v == 0.0:
        raise OutsideDomain(f"u={u!r} is not under Omega (phi = 0)")
    return _density_from_slope(p, kernel_slope(measure, fp))


def brown_density_at(measure: MeasureSpec, p: EllipticParams, lam: complex) -> float:
    """``w`` at a point of the plane; independent of ``Im lam`` inside ``Omega``."""
    lam = complex(lam)
    u0, fp = _inverse(measure, p, lam.real)
    phi = p.height_ratio * fp.v
    if not abs(lam.imag) < phi:
        raise OutsideOmega(f"{lam!r} is outside Omega (phi = {phi:.6g})")
    return _density_from_slope(p, kernel_slope(measure, fp))


def circular_density(measure: MeasureSpec, s: float, u0: float) -> float:
    """Circular-case density ``psi_s'(u0) / (2 pi s)``."""
    fp = v_t(measure, s, u0)
    if fp.v == 0.0:
        raise OutsideLambda(f"u0={u0!r} is outside Lambda_s")
    return (1.0 + s * kernel_slope(measure, fp)) / (2.0 * math.pi * s)


def density_transfer(measure: MeasureSpec, p: EllipticParams, u0: float):
    """Two routes to ``w_{alpha,beta}(U(u0))``.

    Returns ``(direct, transferred)``: the elliptic density at ``f(u0)`` through
    ``f^-1``, and the value carried over from the circular density ``w_c`` at
    ``u0`` by ``(1/q) w_c / (q + 2 pi (1 - q) s w_c)`` with ``q = 2 beta / s``.
    """
    direct = brown_density(measure, p, f_ab(measure, p, u0))
    wc = circular_density(measure, p.s, u0)
    q = p.height_ratio
    return direct, wc / (q * (q + 2.0 * math.pi * (1.0 - q) * p.s * wc))


def pushforward_U(measure: MeasureSpec, p: EllipticParams, lam0: complex) -> complex:
    """``U(u0 + i v0) = f(u0) + i (2 beta / s) v0`` on the closure of ``Lambda_s``."""
    lam0 = complex(lam0)
    fp = _point(measure, p, lam0.real)
    if abs(lam0.imag) > fp.v + BOUNDARY_TOL:
        raise OutsideLambda(f"{lam0!r} is outside Lambda_s (v_s = {fp.v:.6g})")
    u = lam0.real + p.r * _i1_on_boundary(measure, fp)
    return complex(u, p.height_ratio * lam0.imag)


def pushforward_Q(measure: MeasureSpec, p: EllipticParams, lam: complex) -> float:
    """Map from ``Omega`` to the real line carrying the Brown measure to ``x0 + sigma_s``.

    ``Q(u + iv) = (s u - 2 beta f^-1(u)) / r`` for ``r != 0`` and ``psi_s(u)``
    in the circular case.
    """
    lam = complex(lam)
    u0, fp = _inverse(measure, p, lam.real)
    if abs(lam.imag) > p.height_ratio * fp.v + BOUNDARY_TOL:
        raise OutsideOmega(f"{lam!r} is outside the closure of Omega")
    if p.r == 0.0:
        return u0 + p.s * _i1_on_boundary(measure, fp)
    return (p.s * lam.real - 2.0 * p.beta * u0) / p.r


def pushforward_Q_via_psi(measure: MeasureSpec, p: EllipticParams, u: float) -> float:
    """``psi_s(f^-1(u))``, the same map evaluated through the subordination function."""
    u0, fp = _inverse(measure, p, u)
    return u0 + p.s * _i1_on_boundary(measure, fp)


def grad_s(measure: MeasureSpec, t: float, lam: complex):
    """Gradient of the log-potential inside ``Omega`` for ``alpha = 0, beta = t``.

    Returns ``(2 f^-1(u)/t - 2u/t, v/t)``.
    """
    lam = complex(lam)
    p = EllipticParams.imaginary(t)
    u0, fp = _inverse(measure, p, lam.real)
    if not abs(lam.imag) < 2.0 * fp.v:
        raise OutsideOmega(f"{lam!r} is outside Omega_t")
    return 2.0 * (u0 - lam.real) / t, lam.imag / t


def f_second_derivative(measure: MeasureSpec, p: EllipticParams, u0: float, h: float = FD_STEP):
    """``f''(u0) = (r/s) psi_s''(u0)`` by central differences of the analytic ``psi_s'``."""
    return _second_derivatives(measure, p, u0, h)[0]


def f_second_derivative_pair(measure: MeasureSpec, p: EllipticParams, u0: float, h: float = FD_STEP):
    """``f''(u0)`` two ways: ``(r/s) psi_s''`` and ``2 pi r w_c'`` from the circular density."""
    return _second_derivatives(measure, p, u0, h)


def _second_derivatives(measure, p, u0, h):
    fp = _point(measure, p, u0)
    if fp.v == 0.0:
        raise OutsideLambda(f"u0={u0!r} is outside Lambda_s")
    if p.r == 0.0:
        return 0.0, 0.0
    s = p.s
    plus = _point(measure, p, u0 + h, fp.v)
    minus = _point(measure, p, u0 - h, fp.v)
    if plus.v == 0.0 or minus.v == 0.0:
        raise OutsideLambda(f"u0={u0!r} is within one step of the boundary of Lambda_s")
    dpsi_plus = 1.0 + s * kernel_slope(measure, plus)
    dpsi_minus = 1.0 + s * kernel_slope(measure, minus)
    via_psi = (p.r / s) * (dpsi_plus - dpsi_minus) / (2.0 * h)
    wc_plus = circular_density(measure, s, u0 + h)
    wc_minus = circular_density(measure, s, u0 - h)
    via_wc = 2.0 * math.pi * p.r * (wc_plus - wc_minus) / (2.0 * h)
    return via_psi, via_wc


def spacing_inflection(measure: MeasureSpec, p: EllipticParams, lo: float, hi: float) -> float:
    """Zero of ``f''`` inside ``[lo, hi]`` by bisection on its sign."""
    return bisect(lambda x: f_second_derivative(measure, p, x), lo, hi, xtol=1e-9)


# -- fields ----------------------------------------------------------------


@dataclass(frozen=True)
class DensityField:
    """Sampled boundary ``phi`` and strip density ``w`` of the Brown measure.

    Grids run over each component of ``Lambda_s`` in ``u0`` and are mapped by
    ``f``. Component endpoints appear with ``phi = 0`` and ``w = NaN``.
    ``mass`` is the total including ``tail_mass``, the part beyond the window.
    """

    params: EllipticParams
    u0_grid: np.ndarray
    u_grid: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    components: SupportComponents
    component_index: np.ndarray
    mass: float
    tail_mass: float
    metadata: dict = field(default_factory=dict)

    @property
    def window(self):
        return float(np.min(self.u_grid)), float(np.max(self.u_grid))

    @property
    def height(self):
        return float(np.max(self.phi))

    def density_at(self, u):
        """Linear interpolation of ``(phi, w)`` in ``u`` within the owning component."""
        u = np.asarray(u, dtype=float)
        phi = np.zeros_like(u)
        w = np.full_like(u, np.nan)
        for k in np.unique(self.component_index):
            sel = self.component_index == k
            ug, pg, wg = self.u_grid[sel], self.phi[sel], self.w[sel]
            inside = (u >= ug[0]) & (u <= ug[-1])
            phi[inside] = np.interp(u[inside], ug, pg)
            ok = np.isfinite(wg)
            w[inside] = np.interp(u[inside], ug[ok], wg[ok])
        return phi, w

    def sidecar(self):
        comps = [list(map(float, c)) for c in self.components.intervals]
        return {
            "params": self.params.to_dict(),
            "s": self.params.s,
            "components_u0": comps,
            "unbounded_below": self.components.unbounded_below,
            "unbounded_above": self.components.unbounded_above,
            "mass": self.mass,
            "tail_mass": self.tail_mass,
            "points": int(self.u_grid.size),
            **self.metadata,
        }

    def rows(self):
        return zip(self.u0_grid, self.u_grid, self.phi, self.w)

    def write_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["u0", "u", "phi", "w"])
            for row in self.rows():
                writer.writerow([repr(float(x)) for x in row])

    def write_sidecar(self, path, extra=None):
        data = self.sidecar()
        if extra:
            data.update(extra)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, allow_nan=True)


def default_window(measure: MeasureSpec, s: float):
    """``[min supp - 3 sqrt(s), max supp + 3 sqrt(s)]``, or 1e-4 quantiles for unbounded laws."""
    lo, hi = measure.quantile_window(1e-4)
    pad = 3.0 * math.sqrt(s)
    return lo - pad, hi + pad


def _tail_term(u_end, phi_end, w_end):
    # phi ~ C/u**2 beyond the grid with C fitted at the last node; w ~ w_end.
    if not (phi_end > 0 and math.isfinite(w_end)):
        return 0.0
    C = phi_end * u_end * u_end
    return 2.0 * w_end * C / abs(u_end)


def density_field(measure: MeasureSpec, p: EllipticParams, resolution: int = 200,
                  window=None, search_step=None) -> DensityField:
    """Assemble ``phi`` and ``w`` over every component of ``Lambda_s``.

    Parameters
    ----------
    resolution : int
        Nodes per component.
    window : (lower, upper), optional
        ``u0`` range to scan and to sample. Defaults to :func:`default_window`.
    search_step : float, optional
        Scan step for the component endpoints; defaults to window/400.

    Notes
    -----
    Mass is ``int 2 phi w du`` by Simpson's rule in the node parameter, with
    ``du = f'(u0) du0``. For components running
    off the window a tail ``2 w C / |u|`` is added on each open side, from
    ``phi ~ C/u**2`` and ``w`` frozen at the last node.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    s = p.s
    if window is None:
        window = default_window(measure, s)
    lower, upper = map(float, window)
    if not upper > lower:
        raise ValueError("empty window")
    step = search_step if search_step is not None else (upper - lower) / 400
    comps = support_components(measure, s, (lower, upper, step))
    center, scale = measure.center_scale()
    scale = max(scale, math.sqrt(s))

    u0s, us, phis, ws, idx = [], [], [], [], []
    mass = tail = 0.0
    n_comp = len(comps.intervals)
    for k, (a, b) in enumerate(comps.intervals):
        open_lo = k == 0 and comps.unbounded_below
        open_hi = k == n_comp - 1 and comps.unbounded_above
        nodes, jac, param = component_nodes(a, b, resolution, not open_lo, not open_hi,
                                             center, scale)
        guess = None
        samples = []
        for x in nodes:
            smp = sample_at(measure, p, x, guess)
            guess = smp.v if smp.v > 0 else None
            samples.append(smp)
        u_k = np.array([q.u for q in samples])
        phi_k = np.array([q.phi for q in samples])
        w_k = np.array([q.w for q in samples])
        fprime = 1.0 + p.r * np.array([q.slope for q in samples])
        # du = f'(u0) du0, integrated in the smooth node parameter
        inside = phi_k > 0
        integrand = np.zeros_like(phi_k)
        integrand[inside] = 2.0 * phi_k[inside] * w_k[inside] * fprime[inside] * jac[inside]
        mass += float(simpson(integrand, x=param))
        if open_lo:
            tail += _tail_term(u_k[0], phi_k[0], w_k[0])
        if open_hi:
            tail += _tail_term(u_k[-1], phi_k[-1], w_k[-1])
        u0s.append(nodes)
        us.append(u_k)
        phis.append(phi_k)
        ws.append(w_k)
        idx.append(np.full(nodes.size, k))
    if not u0s:
        raise OutsideDomain("no component of Lambda_s inside the window")
    return DensityField(
        params=p,
        u0_grid=np.concatenate(u0s),
        u_grid=np.concatenate(us),
        phi=np.concatenate(phis),
        w=np.concatenate(ws),
        components=comps,
        component_index=np.concatenate(idx),
        mass=mass + tail,
        tail_mass=tail,
        metadata={"window_u0": [lower, upper], "resolution": int(resolution)},
    )
