"""Subordination for the semicircular flow ``x0 + sigma_t``.

For ``t > 0`` the boundary height ``v_t(u)`` is the positive solution of

    i0(u, v) = int dmu(x) / ((u - x)**2 + v**2) = 1 / t

or zero when no solution exists. The region ``Lambda_t = {|v| < v_t(u)}`` is
mapped by ``H_t(z) = z + t G(z)`` onto the upper half plane, its boundary goes
to the real line through ``psi_t(u) = H_t(u + i v_t(u))``, and the law of
``x0 + sigma_t`` has density ``v_t(u) / (pi t)`` at ``psi_t(u)``.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DivergentIntegral, ImaginaryResidual, ResolutionTooCoarse
from .measure_core import KernelBundle, MeasureSpec, cauchy_transform, kernel_bundle
from .roots import bisect, safeguarded_newton

V_RTOL = 1e-13
IMAG_TOL = 1e-9
ENDPOINT_XTOL = 1e-12

# Relative error added to every positive v_t, for validating the validators.
_V_FAULT = contextvars.ContextVar("v_fault", default=0.0)


@contextlib.contextmanager
def injected_v_error(relative):
    """Scale every positive ``v_t`` by ``1 + relative`` inside the block.

    Used to check that the oracle comparisons notice a broken pipeline.
    """
    token = _V_FAULT.set(float(relative))
    try:
        yield
    finally:
        _V_FAULT.reset(token)


@dataclass(frozen=True)
class FlowPoint:
    """``v_t(u)`` together with its derivative and the kernel at the root.

    ``dv_du`` is reported as 0 wherever ``v == 0``; at the endpoints of a
    component the true slope is infinite and the value carries no meaning.
    """

    u: float
    t: float
    v: float
    dv_du: float
    residual: float
    kernel: Optional[KernelBundle] = None


@dataclass(frozen=True)
class SupportComponents:
    """Maximal open intervals of ``{u : v_t(u) > 0}`` inside a search window.

    An interval touching the window edge where ``v_t`` is still positive is
    flagged unbounded on that side; its recorded endpoint is the window edge.
    """

    intervals: tuple
    unbounded_below: bool = False
    unbounded_above: bool = False

    def __len__(self):
        return len(self.intervals)

    def contains(self, u):
        return any(a < u < b for a, b in self.intervals)


class ConvolutionDensity(NamedTuple):
    x: np.ndarray
    density: np.ndarray


def _validate_t(t):
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"t must be positive and finite, got {t!r}")
    return t


def i0_at_axis(measure: MeasureSpec, u: float) -> float:
    """``i0(u, 0+)``: the kernel on the real axis, ``inf`` where it diverges."""
    try:
        return float(kernel_bundle(measure, u, 0.0).i0)
    except DivergentIntegral:
        return math.inf


def v_t(measure: MeasureSpec, t: float, u: float, v_guess: Optional[float] = None) -> FlowPoint:
    """Boundary height ``v_t(u)`` of ``Lambda_t``.

    Parameters
    ----------
    measure : MeasureSpec
    t : float
        Flow time, positive.
    u : float
    v_guess : float, optional
        Starting point for the Newton iteration, e.g. the value at a
        neighbouring grid point.

    Returns
    -------
    FlowPoint

    Notes
    -----
    ``1/i0`` is increasing in ``v`` and ``i0 <= 1/v**2`` puts the root in
    ``(0, sqrt(t)]``. The root is polished by safeguarded Newton on
    ``F(v) = 1/i0 - t`` with ``F'(v) = 2 v j0 / i0**2`` to a relative step of
    1e-13.
    """
    t = _validate_t(t)
    u = float(u)
    if i0_at_axis(measure, u) <= 1.0 / t:
        return FlowPoint(u, t, 0.0, 0.0, 0.0, None)

    def F(v):
        kb = kernel_bundle(measure, u, v)
        return 1.0 / kb.i0 - t, 2.0 * v * kb.j0 / (kb.i0 * kb.i0)

    hi = math.sqrt(t)
    if measure.is_dirac and u == float(measure.locations[0]):
        # i0 = 1/v**2 exactly, so the root is the bracket end.
        v = hi
    else:
        # F(0+) = 1/i0(u, 0+) - t < 0 by the axis test and F(sqrt(t)) >= 0
        # because i0 <= 1/v**2, so both end signs are known without evaluation.
        x0 = v_guess if v_guess is not None and 0 < v_guess < hi else 0.5 * hi
        v = safeguarded_newton(F, 0.0, hi, x0=x0, xtol=0.0, rtol=V_RTOL, log_bisect=True,
                               f_lo=-t, f_hi=1.0)
        if not v > 1e-150 * hi:
            # The axis test said divergent but no positive root exists.
            return FlowPoint(u, t, 0.0, 0.0, 0.0, None)
    fault = _V_FAULT.get()
    if fault:
        v *= 1.0 + fault
    kb = kernel_bundle(measure, u, v)
    return FlowPoint(u, t, v, -kb.j1 / (v * kb.j0), abs(kb.i0 - 1.0 / t), kb)


def v_t_grid(measure: MeasureSpec, t: float, u_grid) -> list:
    """``v_t`` along a sorted grid, warm-starting each root from its neighbour."""
    out = []
    guess = None
    for u in np.asarray(u_grid, dtype=float):
        fp = v_t(measure, t, u, v_guess=guess)
        guess = fp.v if fp.v > 0 else None
        out.append(fp)
    return out


def default_search(measure: MeasureSpec, t: float, points: int = 400):
    """Search window covering the support dilated by ``3 sqrt(t)``."""
    lo, hi = measure.quantile_window()
    pad = 3.0 * math.sqrt(t)
    lo, hi = lo - pad, hi + pad
    return lo, hi, (hi - lo) / points


def support_components(measure: MeasureSpec, t: float, search=None) -> SupportComponents:
    """Components of ``Lambda_t`` on the real line.

    Parameters
    ----------
    search : (lower, upper, step), optional
        Scan window and resolution. Defaults to :func:`default_search`.

    Raises
    ------
    ResolutionTooCoarse
        When a scan cell whose ends agree in sign has a midpoint of the
        other sign, i.e. the step hides a pair of endpoints.
    """
    t = _validate_t(t)
    if search is None:
        search = default_search(measure, t)
    lower, upper, step = (float(x) for x in search)
    if not (upper > lower and step > 0):
        raise ValueError("search must satisfy upper > lower and step > 0")
    n = max(int(math.ceil((upper - lower) / step)), 1)
    grid = np.linspace(lower, upper, n + 1)

    def inside(u):
        return i0_at_axis(measure, u) > 1.0 / t

    flags = np.array([inside(u) for u in grid])
    for k in range(n):
        if flags[k] == flags[k + 1]:
            mid = 0.5 * (grid[k] + grid[k + 1])
            if inside(mid) != flags[k]:
                raise ResolutionTooCoarse(
                    f"two endpoints of Lambda within one step near u={mid:.6g}; reduce the step"
                )

    def crossing(a, b):
        return bisect(lambda u: 1.0 if inside(u) else -1.0, a, b, xtol=ENDPOINT_XTOL)

    intervals = []
    start = lower if flags[0] else None
    for k in range(n):
        if flags[k] != flags[k + 1]:
            x = crossing(grid[k], grid[k + 1])
            if flags[k + 1]:
                start = x
            else:
                intervals.append((start, x))
                start = None
    if start is not None:
        intervals.append((start, upper))
    return SupportComponents(tuple(intervals), bool(flags[0]), bool(flags[-1]))


def component_nodes(a, b, n, bounded_lo, bounded_hi, center, scale):
    """Nodes over one component and ``d node / d parameter`` for an even parameter grid."""
    if bounded_lo and bounded_hi:
        # cosine spacing clusters nodes at the square-root endpoints
        theta = np.linspace(0.0, math.pi, n)
        return a + 0.5 * (b - a) * (1.0 - np.cos(theta)), 0.5 * (b - a) * np.sin(theta), theta
    # sinh map: even spacing near the bulk, geometric spacing in the tails
    xi = np.linspace(math.asinh((a - center) / scale), math.asinh((b - center) / scale), n)
    nodes = center + scale * np.sinh(xi)
    if bounded_lo:
        nodes[0] = a
    if bounded_hi:
        nodes[-1] = b
    return nodes, scale * np.cosh(xi), xi


@dataclass(frozen=True)
class ConvolutionTable:
    """Sampled density of ``x0 + sigma_t``.

    ``mass`` is the total including ``tail_mass``, the part beyond the window.
    """

    u: np.ndarray
    x: np.ndarray
    density: np.ndarray
    mass: float
    tail_mass: float


def convolution_table(measure: MeasureSpec, t: float, resolution: int = 200, window=None,
                      search_step=None) -> ConvolutionTable:
    """``(psi_t(u), v_t(u)/(pi t))`` over every component of ``Lambda_t``.

    Mass is ``int v_t/(pi t) psi_t'(u) du`` by Simpson's rule in the node
    parameter. On a side where the component runs off the window a tail
    ``p(x_end) |x_end|`` is added, the integral of a ``C/x^2`` tail.
    """
    from scipy.integrate import simpson

    t = _validate_t(t)
    if window is None:
        lo, hi, _ = default_search(measure, t)
    else:
        lo, hi = map(float, window)
    if not hi > lo:
        raise ValueError("empty window")
    step = search_step if search_step is not None else (hi - lo) / 400
    comps = support_components(measure, t, (lo, hi, step))
    center, scale = measure.center_scale()
    scale = max(scale, math.sqrt(t))
    us, xs, ps = [], [], []
    mass = tail = 0.0
    last = len(comps.intervals) - 1
    for k, (a, b) in enumerate(comps.intervals):
        open_lo = k == 0 and comps.unbounded_below
        open_hi = k == last and comps.unbounded_above
        nodes, jac, param = component_nodes(a, b, resolution, not open_lo, not open_hi, center, scale)
        points = v_t_grid(measure, t, nodes)
        x = np.array([_psi_from_point(measure, fp) for fp in points])
        p = np.array([fp.v for fp in points]) / (math.pi * t)
        dpsi = np.array([1.0 + t * kernel_slope(measure, fp) if fp.v > 0 else 0.0 for fp in points])
        mass += float(simpson(p * dpsi * jac, x=param))
        if open_lo:
            tail += p[0] * abs(x[0])
        if open_hi:
            tail += p[-1] * abs(x[-1])
        us.append(nodes)
        xs.append(x)
        ps.append(p)
    return ConvolutionTable(np.concatenate(us), np.concatenate(xs), np.concatenate(ps),
                            mass + tail, tail)


def h_map(measure: MeasureSpec, r: float, z: complex) -> complex:
    """``H_r(z) = z + r G(z)``."""
    z = complex(z)
    return z + float(r) * cauchy_transform(measure, z)


def _psi_from_point(measure, fp):
    if fp.v == 0.0:
        return fp.u + fp.t * cauchy_transform(measure, fp.u).real
    kb = fp.kernel
    # H(u + iv) = u + t i1 + i v (1 - t i0); the imaginary part vanishes at the root.
    imag = fp.v * (1.0 - fp.t * kb.i0)
    if abs(imag) > IMAG_TOL:
        raise ImaginaryResidual(f"Im H_t(u + i v_t) = {imag:.3e} at u={fp.u!r}")
    return fp.u + fp.t * kb.i1


def psi_t(measure: MeasureSpec, t: float, u: float) -> float:
    """``psi_t(u) = H_t(u + i v_t(u))``, a real increasing homeomorphism."""
    return _psi_from_point(measure, v_t(measure, t, u))


def psi_t_derivative(measure: MeasureSpec, t: float, u: float, point: Optional[FlowPoint] = None) -> float:
    """Analytic ``psi_t'(u)``.

    Inside ``Lambda_t`` this is ``1 + t(-i0 + 2 v**2 j0 + 2 j1**2 / j0)``,
    the total derivative of ``u + t i1(u, v_t(u))``; outside it is
    ``1 - t i0(u, 0)``.
    """
    fp = point if point is not None else v_t(measure, t, u)
    return 1.0 + fp.t * kernel_slope(measure, fp)


def kernel_slope(measure: MeasureSpec, fp: FlowPoint) -> float:
    """Total derivative ``d/du i1(u, v_t(u))``."""
    if fp.v == 0.0:
        return -float(kernel_bundle(measure, fp.u, 0.0).i0)
    kb = fp.kernel
    return -kb.i0 + 2.0 * fp.v * fp.v * kb.j0 + 2.0 * kb.j1 * kb.j1 / kb.j0


def free_convolution_density(measure: MeasureSpec, t: float, u_grid) -> ConvolutionDensity:
    """Density of ``x0 + sigma_t`` as pairs ``(psi_t(u), v_t(u) / (pi t))``."""
    t = _validate_t(t)
    points = v_t_grid(measure, t, np.sort(np.asarray(u_grid, dtype=float)))
    x = np.array([_psi_from_point(measure, fp) for fp in points])
    p = np.array([fp.v for fp in points]) / (math.pi * t)
    if np.any(np.diff(x) <= 0):
        raise ImaginaryResidual("psi_t failed to increase on the grid; kernel or root failure")
    return ConvolutionDensity(x, p)


def v_t_derivative_fd_check(measure: MeasureSpec, t: float, u: float, h: float = 1e-5):
    """Return ``(analytic, central difference)`` for ``dv_t/du`` at ``u``."""
    fp = v_t(measure, t, u)
    if fp.v == 0.0:
        raise ValueError("dv/du check needs v_t(u) > 0")
    plus = v_t(measure, t, u + h, v_guess=fp.v).v
    minus = v_t(measure, t, u - h, v_guess=fp.v).v
    return fp.dv_du, (plus - minus) / (2.0 * h)
