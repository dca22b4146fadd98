"""Bracketed scalar root finding.

``safeguarded_newton`` keeps a sign-change bracket at all times and falls back
to bisection whenever a Newton step leaves it or fails to shrink it fast
enough, so it inherits the global convergence of bisection.
"""

import math

from .errors import BracketFailure


def bisect(func, lo, hi, xtol=0.0, max_iter=200):
    """Plain bisection on a sign change; iterates to float adjacency by default."""
    flo = func(lo)
    fhi = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketFailure(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= xtol:
            break
        fmid = func(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def safeguarded_newton(func, lo, hi, x0=None, xtol=1e-13, rtol=0.0, ftol=0.0,
                       max_iter=200, log_bisect=False, f_lo=None, f_hi=None):
    """Root of ``func`` on ``[lo, hi]`` where ``func(x)`` returns ``(f, df)``.

    ``f(lo)`` and ``f(hi)`` must have opposite signs (zero allowed). When
    ``log_bisect`` is set and the bracket spans several decades of positive
    numbers, fallback steps bisect geometrically. Iteration stops once a
    step is below ``xtol + rtol * |x|``. ``f_lo`` and ``f_hi`` may be passed
    when the end values (or just their signs) are known, saving two calls.
    """
    flo = func(lo)[0] if f_lo is None else f_lo
    fhi = func(hi)[0] if f_hi is None else f_hi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketFailure(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    increasing = fhi > 0

    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    dx_old = dx = hi - lo
    f, df = func(x)
    for _ in range(max_iter):
        if f == 0.0 or abs(f) <= ftol:
            return x
        if (f > 0) == increasing:
            hi = x
        else:
            lo = x
        newton = df != 0.0 and math.isfinite(df)
        if newton:
            x_new = x - f / df
            newton = lo < x_new < hi and abs(2.0 * f) <= abs(dx_old * df)
        dx_old = dx
        if not newton:
            if log_bisect and lo == 0.0:
                x_new = 1e-3 * hi
            elif log_bisect and lo > 0 and hi > 4 * lo:
                x_new = math.sqrt(lo * hi)
            else:
                x_new = 0.5 * (lo + hi)
        dx = x_new - x
        if abs(dx) <= xtol + rtol * abs(x_new) or hi - lo <= xtol:
            return x_new
        x = x_new
        f, df = func(x)
    return x
