"""Minimal SVG rendering of density fields and eigenvalue clouds.

No plotting dependency: a field is drawn as vertical grayscale strips between
``-phi`` and ``phi`` with the boundary as a polyline, and a cloud as dots over
that boundary.
"""

from __future__ import annotations

import json
import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 400, 20


def _frame(u_lo, u_hi, v_hi):
    sx = (WIDTH - 2 * MARGIN) / max(u_hi - u_lo, 1e-300)
    sy = (HEIGHT - 2 * MARGIN) / max(2 * v_hi, 1e-300)

    def to_px(u, v):
        return MARGIN + (u - u_lo) * sx, HEIGHT / 2 - v * sy

    return to_px


def _open(meta):
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">']
    if meta is not None:
        head.append(f"<metadata>{escape(json.dumps(meta, sort_keys=True, default=str))}</metadata>")
    head.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    return head


def _boundary(to_px, u, phi):
    ok = np.isfinite(u) & np.isfinite(phi)
    top = " ".join("%.2f,%.2f" % to_px(a, b) for a, b in zip(u[ok], phi[ok]))
    bot = " ".join("%.2f,%.2f" % to_px(a, -b) for a, b in zip(u[ok], phi[ok]))
    return [f'<polyline points="{top}" fill="none" stroke="black" stroke-width="1"/>',
            f'<polyline points="{bot}" fill="none" stroke="black" stroke-width="1"/>']


def density_svg(u, phi, w, meta=None) -> str:
    """Strips shaded by ``w`` (darker is denser) bounded by ``+-phi``."""
    u, phi, w = (np.asarray(a, dtype=float) for a in (u, phi, w))
    v_hi = float(np.nanmax(phi)) * 1.05 or 1.0
    to_px = _frame(float(u.min()), float(u.max()), v_hi)
    finite = w[np.isfinite(w) & (phi > 0)]
    w_max = float(finite.max()) if finite.size else 1.0
    out = _open(meta)
    for k in range(u.size - 1):
        wk = np.nanmean(w[k:k + 2])
        hk = 0.5 * (phi[k] + phi[k + 1])
        if not (hk > 0 and math.isfinite(wk)) or not u[k + 1] > u[k]:
            continue
        x0, y0 = to_px(u[k], hk)
        x1, y1 = to_px(u[k + 1], -hk)
        level = int(round(255 * (1.0 - min(wk / w_max, 1.0))))
        out.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" height="{y1 - y0:.2f}" '
                   f'fill="rgb({level},{level},{level})" stroke="none"/>')
    out += _boundary(to_px, u, phi)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_svg(z, u, phi, box, meta=None) -> str:
    """Eigenvalues as dots inside ``box = (u_lo, u_hi, v_lo, v_hi)`` with the boundary."""
    z = np.asarray(z)
    u_lo, u_hi, _, v_hi = box
    to_px = _frame(u_lo, u_hi, v_hi)
    out = _open(meta)
    sel = (z.real >= u_lo) & (z.real <= u_hi) & (np.abs(z.imag) <= v_hi)
    for p in z[sel]:
        x, y = to_px(p.real, p.imag)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.2" fill="black"/>')
    u = np.asarray(u, dtype=float)
    keep = (u >= u_lo) & (u <= u_hi)
    out += _boundary(to_px, u[keep], np.asarray(phi, dtype=float)[keep])
    out.append("</svg>")
    return "\n".join(out) + "\n"
