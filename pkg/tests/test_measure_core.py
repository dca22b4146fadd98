import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from brownmeasure import (
    MeasureSpec,
    cauchy_transform,
    check_log_integrability,
    kernel_bundle,
    log_energy,
)
from brownmeasure.errors import DivergentIntegral, InvalidMeasure, NonFiniteInput, OnSupport
from brownmeasure.measure_core import sample

from conftest import cauchy_poisson_i0


def G_semicircle(z, t=1.0):
    # principal branch chosen so that G ~ 1/z at infinity
    r = cmath.sqrt(z * z - 4 * t)
    if (r / z).real < 0:
        r = -r
    return (z - r) / (2 * t)


def bundle_from_G(G, dG, u, v):
    """Kernel integrals from the Cauchy transform and its derivative at ``u + iv``."""
    i0 = -G.imag / v
    return i0, G.real, (i0 + dG.real) / (2 * v * v), dG.imag / (2 * v)


# -- construction ----------------------------------------------------------


def test_atoms_validation():
    with pytest.raises(InvalidMeasure):
        MeasureSpec.atoms([(0.0, 0.5), (1.0, 0.6)])
    with pytest.raises(InvalidMeasure):
        MeasureSpec.atoms([(1.0, 0.5), (0.0, 0.5)])
    with pytest.raises(InvalidMeasure):
        MeasureSpec.atoms([(0.0, 1.0)])
    with pytest.raises(NonFiniteInput):
        MeasureSpec.atoms([(math.nan, 1.0)], allow_dirac=True)
    assert MeasureSpec.dirac(2.0).is_dirac


def test_tabulated_validation():
    with pytest.raises(InvalidMeasure):
        MeasureSpec.tabulated([0, 1, 2], [1, 1, 1])
    m = MeasureSpec.tabulated([0, 1, 2], [1, 1, 1], normalize=True)
    assert abs(np.trapezoid(m.density, m.grid) - 1) < 1e-15


@pytest.mark.parametrize("m", [
    MeasureSpec.cauchy(1.0, 2.0),
    MeasureSpec.semicircle(0.5),
    MeasureSpec.uniform(-1, 3),
    MeasureSpec.atoms([(-1.0, 0.25), (2.0, 0.75)]),
    MeasureSpec.dirac(),
    MeasureSpec.tabulated([0, 1, 2], [0, 1, 0]),
])
def test_json_round_trip(m):
    back = MeasureSpec.from_json(m.to_json())
    assert back.to_dict() == m.to_dict()
    assert json.loads(back.to_json()) == json.loads(m.to_json())


def test_unknown_kind():
    with pytest.raises(InvalidMeasure):
        MeasureSpec.from_dict({"kind": "gamma"})


# -- kernel bundle -----------------------------------------------------------


def test_kernel_single_atom(dirac):
    kb = kernel_bundle(dirac, 0.0, 1.0)
    assert (kb.i0, kb.i1, kb.ix, kb.j0, kb.j1) == (1.0, 0.0, 0.0, 1.0, 0.0)


def test_kernel_cauchy_unit_point(cauchy):
    assert abs(kernel_bundle(cauchy, 0.0, 1.0).i0 - 0.5) < 1e-14


def test_kernel_two_atoms(two_atoms):
    kb = kernel_bundle(two_atoms, 0.0, 1.0)
    assert abs(kb.i0 - 0.5) < 1e-15
    assert abs(kb.ix - 1 / 6) < 1e-15


@given(st.floats(-1e4, 1e4), st.floats(1e-8, 1e3), st.floats(0, 10))
@settings(max_examples=60, deadline=None)
def test_kernel_cauchy_against_residues(u, v, eps):
    m = MeasureSpec.cauchy()
    kb = kernel_bundle(m, u, v, eps)
    c = math.sqrt(v * v + eps)
    z = complex(u, c)
    G, dG = 1 / (z + 1j), -1 / (z + 1j) ** 2
    i0, i1, j0, j1 = bundle_from_G(G, dG, u, c)
    # the oracle for j0 cancels i0 against Re G'; allow for its rounding
    j0_floor = 1e-14 * (i0 + abs(dG)) / (c * c)
    assert abs(kb.i0 - i0) <= 1e-10 * i0
    assert abs(kb.i1 - i1) <= 1e-10 * abs(G)
    assert abs(kb.j0 - j0) <= 1e-9 * j0 + j0_floor
    assert abs(kb.j1 - j1) <= 1e-9 * abs(dG) / c
    assert abs(kb.i1 - (u * kb.i0 - kb.ix)) <= 1e-12 * max(abs(u * kb.i0), abs(kb.ix), abs(kb.i1), 1e-300)


@pytest.mark.parametrize("u,v", [(0.0, 1.0), (1.9, 0.01), (-2.5, 0.3), (0.7, 1e-6), (10.0, 2.0)])
def test_kernel_semicircle_against_closed_form(semicircle, u, v):
    z = complex(u, v)
    G = G_semicircle(z)
    dG = -G * G / (1 - G * G)  # from G^2 - z G + 1 = 0
    i0, i1, j0, j1 = bundle_from_G(G, dG, u, v)
    kb = kernel_bundle(semicircle, u, v)
    assert abs(kb.i0 - i0) <= 1e-10 * i0
    assert abs(kb.i1 - i1) <= 1e-10 * max(i0, abs(i1))
    assert abs(kb.j0 - j0) <= 1e-8 * j0
    assert abs(kb.j1 - j1) <= 1e-8 * j0


def test_kernel_uniform_closed_form():
    m = MeasureSpec.uniform(-1.0, 2.0)
    u, v = 0.3, 0.2
    i0 = (math.atan((2 - u) / v) - math.atan((-1 - u) / v)) / (3 * v)
    i1 = -0.5 * math.log(((2 - u) ** 2 + v * v) / ((-1 - u) ** 2 + v * v)) / 3
    kb = kernel_bundle(m, u, v)
    assert abs(kb.i0 - i0) < 1e-12
    assert abs(kb.i1 - i1) < 1e-12


def test_kernel_divergent_on_support(cauchy, dirac):
    with pytest.raises(DivergentIntegral):
        kernel_bundle(cauchy, 0.5, 0.0)
    with pytest.raises(DivergentIntegral):
        kernel_bundle(dirac, 0.0, 0.0)
    with pytest.raises(NonFiniteInput):
        kernel_bundle(cauchy, math.nan, 1.0)


def test_kernel_off_support_axis(semicircle):
    # real axis outside [-2, 2]: i0 = -G'(u) with G real there
    u = 3.0
    G = G_semicircle(complex(u, 0)).real
    i0 = G * G / (1 - G * G)
    assert abs(kernel_bundle(semicircle, u, 0.0).i0 - i0) < 1e-11


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=8, unique=True),
       st.floats(-6, 6), st.floats(0.01, 3))
@settings(max_examples=60, deadline=None)
def test_atom_sandwich(locs, u, v):
    locs = sorted(locs)
    assume(min(np.diff(locs)) > 1e-6)
    m = MeasureSpec.atoms([(x, 1 / len(locs)) for x in locs])
    D = (u - np.array(locs)) ** 2 + v * v
    i0 = kernel_bundle(m, u, v).i0
    assert i0 * D.min() <= 1 + 1e-14
    assert i0 >= (1 - 1e-14) / D.max()


@pytest.mark.parametrize("m,c", [
    (MeasureSpec.cauchy(2.0, 1.5), 2.0),
    (MeasureSpec.semicircle(1.0), 0.0),
    (MeasureSpec.atoms([(-1.0, 0.5), (1.0, 0.5)]), 0.0),
])
def test_reflection_symmetry(m, c):
    for d in (0.1, 0.9, 3.0):
        a, b = kernel_bundle(m, c + d, 0.4), kernel_bundle(m, c - d, 0.4)
        assert abs(a.i1 + b.i1) < 1e-10 * a.i0
        assert abs(a.ix + b.ix - 2 * c * a.i0) < 1e-10 * max(1.0, abs(c)) * a.i0


# -- Cauchy transform ------------------------------------------------------


def test_cauchy_transform_examples(dirac, cauchy, semicircle):
    assert abs(cauchy_transform(dirac, 1j) - (-1j)) < 1e-15
    for y in (0.01, 1.0, 50.0):
        assert abs(cauchy_transform(cauchy, 1j * y) - (-1j / (y + 1))) < 1e-12
    assert abs(cauchy_transform(semicircle, 2.0) - 1.0) < 1e-10
    assert abs(cauchy_transform(semicircle, 3.0) - G_semicircle(3.0)) < 1e-12
    with pytest.raises(OnSupport):
        cauchy_transform(semicircle, 1.0)
    with pytest.raises(OnSupport):
        cauchy_transform(dirac, 0.0)


def test_cauchy_transform_sign(cauchy):
    for z in (0.3 + 0.1j, -7 + 2j, 1e3 + 1e-3j):
        assert cauchy_transform(cauchy, z).imag < 0


def test_cauchy_transform_ten_atoms():
    rng = np.random.default_rng(7)
    locs = np.sort(rng.normal(size=10))
    w = rng.uniform(0.5, 1.5, size=10)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    m = MeasureSpec.atoms(list(zip(locs, w)))
    for z in rng.normal(size=100) + 1j * rng.normal(size=100):
        exact = sum(wk / (z - xk) for xk, wk in zip(locs, w))
        assert abs(cauchy_transform(m, z) - exact) <= 1e-12 * max(1.0, abs(exact))


# -- log energy --------------------------------------------------------------


def test_log_energy_atoms(dirac):
    assert log_energy(dirac, 0.0, 1.0) == 0.0
    assert abs(log_energy(dirac, 1.0, 0.5) - math.log(1.5)) < 1e-15


def test_log_energy_cauchy_closed_form(cauchy):
    # E log(1 + X^2) = 2 log 2 for a standard Cauchy X
    assert abs(log_energy(cauchy, 0.0, 1.0) - 2 * math.log(2)) < 1e-10


@pytest.mark.parametrize("lam,eps", [(0.7 + 0.4j, 0.3), (-30.0 + 0.0j, 1e-4), (2.0 + 5.0j, 2.0)])
def test_log_energy_cauchy_harmonic_extension(cauchy, lam, eps):
    # log|x - w|^2 with w = u - ic is harmonic in the upper half plane, so the
    # Cauchy average is its value at i: log(u^2 + (1 + c)^2), c = sqrt(v^2 + eps)
    c = math.sqrt(lam.imag**2 + eps)
    assert abs(log_energy(cauchy, lam, eps) - math.log(lam.real**2 + (1 + c) ** 2)) < 1e-10


def test_log_energy_semicircle_brute_force(semicircle):
    # x = 2 sin(theta) removes the edge singularity; a million midpoint panels
    n = 10**6
    th = (np.arange(n) + 0.5) / n * math.pi - math.pi / 2
    x = 2 * np.sin(th)
    weight = 2 * np.cos(th) ** 2 / math.pi * (math.pi / n)
    lam, eps = 0.7 + 0.4j, 0.3
    brute = np.sum(weight * np.log((x - lam.real) ** 2 + lam.imag**2 + eps))
    assert abs(log_energy(semicircle, lam, eps) - brute) < 1e-8


@pytest.mark.parametrize("m", [MeasureSpec.cauchy(), MeasureSpec.semicircle(2.0),
                               MeasureSpec.atoms([(-1.0, 0.5), (1.0, 0.5)])])
def test_log_energy_eps_derivative(m):
    lam, eps, h = 0.4 + 0.3j, 0.5, 1e-5
    fd = (log_energy(m, lam, eps + h) - log_energy(m, lam, eps - h)) / (2 * h)
    assert abs(fd - kernel_bundle(m, lam.real, lam.imag, eps).i0) < 1e-6


def test_log_integrability():
    assert check_log_integrability(MeasureSpec.cauchy())
    assert check_log_integrability(MeasureSpec.dirac(5.0))
    x = np.geomspace(math.e, 1e8, 4000)
    slow = MeasureSpec.tabulated(x, 1 / (x * np.log(x) ** 2), normalize=True)
    assert check_log_integrability(slow)
    heavy = MeasureSpec.tabulated(x, x**-0.8, normalize=True)
    assert not check_log_integrability(heavy)
    with pytest.raises(DivergentIntegral):
        log_energy(heavy, 10.0, 1.0)


# -- sampling ----------------------------------------------------------------


def test_sampling_laws(two_atoms, cauchy):
    rng = np.random.default_rng(0)
    assert abs(np.mean(sample(two_atoms, 3000, rng) == 1.0) - 2 / 3) < 0.03
    assert abs(np.median(sample(cauchy, 5000, rng))) < 0.05
    tri = MeasureSpec.tabulated([0, 1, 2], [0, 1, 0])
    draws = sample(tri, 20000, rng)
    assert abs(draws.mean() - 1.0) < 0.02
    assert draws.min() >= 0 and draws.max() <= 2


def test_cauchy_poisson_oracle_self_check():
    # the residue formula against brute-force quadrature at one point
    n = 10**6
    th = (np.arange(n) + 0.5) / n * math.pi - math.pi / 2
    x = np.tan(th)
    assert abs(np.mean(1 / ((0.5 - x) ** 2 + 0.09)) - cauchy_poisson_i0(0.5, 0.3)) < 1e-6
