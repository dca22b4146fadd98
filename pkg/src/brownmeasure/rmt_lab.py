"""Random-matrix counterpart of the Brown measure.

The model is ``A_N + sqrt(alpha) Xt_N + i sqrt(beta) X_N`` with ``A_N`` diagonal
with i.i.d. entries from the input law and ``Xt_N``, ``X_N`` independent GUE
matrices normalized so their spectra approach the semicircle of variance 1.
Its eigenvalues are compared with a :class:`~brownmeasure.brown_map.DensityField`
by binned total variation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .brown_map import DensityField, EllipticParams
from .errors import ConvergenceFailure, NonFiniteInput, UnsupportedSampling
from .measure_core import MeasureSpec, sample

STREAMS = ("diagonal", "gue_real", "gue_imag")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_gue(n: int, seed=None) -> np.ndarray:
    """``n x n`` GUE matrix with entry variance ``1/n``.

    Off-diagonal entries are complex Gaussians with ``E|h_ij|^2 = 1/n``; the
    diagonal is real with variance ``1/n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    return (z + z.conj().T) / math.sqrt(2.0 * n)


def sample_diag_law(measure: MeasureSpec, n: int, seed=None) -> np.ndarray:
    """Diagonal matrix with i.i.d. entries drawn from ``measure``."""
    if measure.kind == "tabulated" and measure.grid.size < 2:
        raise UnsupportedSampling("tabulated measure has no CDF to invert")
    return np.diag(sample(measure, n, _rng(seed)))


@dataclass(frozen=True)
class ModelSeeds:
    """Root seed and the independent child streams spawned from it."""

    root: int

    def generators(self):
        children = np.random.SeedSequence(self.root).spawn(len(STREAMS))
        return {name: np.random.default_rng(c) for name, c in zip(STREAMS, children)}

    def to_dict(self):
        return {"root": self.root, "streams": list(STREAMS), "method": "SeedSequence.spawn"}


def build_model(A, p: EllipticParams, seeds) -> np.ndarray:
    """``A + sqrt(alpha) Xt + i sqrt(beta) X`` with independently seeded GUE factors.

    ``seeds`` is a :class:`ModelSeeds`, an integer root seed, or a pair of
    generators/seeds for ``(Xt, X)``. ``A`` may be given by its diagonal.
    """
    A = np.asarray(A)
    if A.ndim == 1:
        A = np.diag(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    n = A.shape[0]
    if isinstance(seeds, (int, np.integer)):
        seeds = ModelSeeds(int(seeds))
    if isinstance(seeds, ModelSeeds):
        gens = seeds.generators()
        g_real, g_imag = gens["gue_real"], gens["gue_imag"]
    else:
        g_real, g_imag = (_rng(s) for s in seeds)
    M = A.astype(complex)
    if p.alpha > 0:
        M = M + math.sqrt(p.alpha) * sample_gue(n, g_real)
    return M + 1j * math.sqrt(p.beta) * sample_gue(n, g_imag)


@dataclass(frozen=True)
class EigenCloud:
    n: int
    eigenvalues: np.ndarray
    seed_record: dict = field(default_factory=dict)
    backward_error: float = 0.0

    def write_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("re,im\n")
            for z in self.eigenvalues:
                fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")


def eigenvalues(matrix, seed_record=None) -> EigenCloud:
    """All eigenvalues by LAPACK's Hessenberg-QR driver, with the backward error.

    The reported error is ``||M V - V diag(lam)||_F / (||M||_F ||V||_F)``.

    Raises
    ------
    ConvergenceFailure
        If the QR iteration does not converge.
    """
    M = np.asarray(matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput("matrix has non-finite entries")
    try:
        lam, V = scipy.linalg.eig(M, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    scale = np.linalg.norm(M) * np.linalg.norm(V)
    resid = np.linalg.norm(M @ V - V * lam[None, :])
    err = float(resid / scale) if scale > 0 else 0.0
    return EigenCloud(M.shape[0], lam, dict(seed_record or {}), err)


def simulate(measure: MeasureSpec, p: EllipticParams, n: int, seed: int) -> EigenCloud:
    """Sample the model with a root seed and return its eigenvalue cloud."""
    seeds = ModelSeeds(int(seed))
    gens = seeds.generators()
    A = np.diag(sample(measure, n, gens["diagonal"]))
    M = build_model(A, p, (gens["gue_real"], gens["gue_imag"]))
    return eigenvalues(M, seeds.to_dict())


# -- comparison -------------------------------------------------------------


def _marginal(field_: DensityField, points_per_cell=8):
    """Fine grid in ``u`` with ``phi`` and ``w`` interpolated inside each component."""
    us = []
    for k in np.unique(field_.component_index):
        ug = field_.u_grid[field_.component_index == k]
        fine = [np.linspace(a, b, points_per_cell + 1)[:-1] for a, b in zip(ug[:-1], ug[1:])]
        us.append(np.concatenate(fine + [ug[-1:]]))
    u = np.concatenate(us)
    phi, w = field_.density_at(u)
    w = np.where(phi > 0, w, 0.0)
    return u, phi, w


def default_box(field_: DensityField, mass_fraction=0.9):
    """Comparison box ``(u_lo, u_hi, v_lo, v_hi)``.

    Bounded domains use their full extent. For unbounded ones the ``u`` range
    is the central interval carrying ``mass_fraction`` of the Brown mass.
    """
    comps = field_.components
    u, phi, w = _marginal(field_)
    if comps.unbounded_below or comps.unbounded_above:
        dens = 2.0 * phi * w
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])
        cdf /= cdf[-1]
        tail = 0.5 * (1.0 - mass_fraction)
        lo, hi = np.interp([tail, 1.0 - tail], cdf, u)
    else:
        lo, hi = float(u.min()), float(u.max())
    sel = (u >= lo) & (u <= hi)
    h = float(phi[sel].max()) * 1.02
    return float(lo), float(hi), -h, h


def brown_bin_masses(field_: DensityField, u_edges, v_edges, sub=200):
    """Brown mass in each ``(u, v)`` bin: ``int w(u) |[v1, v2] cap [-phi, phi]| du``."""
    nu, nv = len(u_edges) - 1, len(v_edges) - 1
    out = np.zeros((nu, nv))
    for i in range(nu):
        # midpoint rule on sub cells of the u bin
        du = (u_edges[i + 1] - u_edges[i]) / sub
        uc = u_edges[i] + du * (np.arange(sub) + 0.5)
        phi, w = field_.density_at(uc)
        w = np.where(phi > 0, np.nan_to_num(w), 0.0)
        for j in range(nv):
            overlap = np.clip(np.minimum(v_edges[j + 1], phi) - np.maximum(v_edges[j], -phi), 0.0, None)
            out[i, j] = float(np.sum(w * overlap) * du)
    return out


@dataclass(frozen=True)
class CloudComparison:
    tv_distance: float
    clipped_fraction: float
    box: tuple
    bins: tuple
    empirical: np.ndarray
    expected: np.ndarray
    brown_mass_in_box: float

    def report(self):
        return {
            "tv_distance": self.tv_distance,
            "clipped_fraction": self.clipped_fraction,
            "box": list(self.box),
            "bins": list(self.bins),
            "brown_mass_in_box": self.brown_mass_in_box,
            "per_bin": {
                "empirical": self.empirical.tolist(),
                "expected": self.expected.tolist(),
            },
        }


def cloud_vs_density(cloud, field_: DensityField, bins=(10, 10), box=None) -> CloudComparison:
    """Binned total variation between an eigenvalue cloud and a Brown density field.

    Both histograms are normalized to the comparison box, so the distance
    compares conditional laws; the share of eigenvalues outside the box is
    reported as ``clipped_fraction`` rather than counted as an error.
    """
    z = np.asarray(cloud.eigenvalues if isinstance(cloud, EigenCloud) else cloud)
    if box is None:
        box = default_box(field_)
    u_lo, u_hi, v_lo, v_hi = box
    nu, nv = bins
    u_edges = np.linspace(u_lo, u_hi, nu + 1)
    v_edges = np.linspace(v_lo, v_hi, nv + 1)
    inside = (z.real >= u_lo) & (z.real <= u_hi) & (z.imag >= v_lo) & (z.imag <= v_hi)
    counts, _, _ = np.histogram2d(z.real[inside], z.imag[inside], bins=[u_edges, v_edges])
    expected = brown_bin_masses(field_, u_edges, v_edges)
    in_box = float(expected.sum())
    emp = counts / max(counts.sum(), 1.0)
    exp_n = expected / in_box
    tv = 0.5 * float(np.abs(emp - exp_n).sum())
    return CloudComparison(tv, 1.0 - float(inside.mean()), tuple(map(float, box)), (nu, nv),
                           emp, exp_n, in_box)


def sample_from_field(field_: DensityField, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. points from the Brown density of a field (the sampled window only)."""
    rng = _rng(seed)
    u, phi, w = _marginal(field_, points_per_cell=16)
    dens = 2.0 * phi * w
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])
    cdf /= cdf[-1]
    us = np.interp(rng.uniform(size=n), cdf, u)
    ph, _ = field_.density_at(us)
    vs = rng.uniform(-1.0, 1.0, size=n) * ph
    return us + 1j * vs
