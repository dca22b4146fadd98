import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brownmeasure import MeasureSpec, cauchy_oracle as co, kernel_bundle
from brownmeasure import subordination as sb
from brownmeasure.errors import ResolutionTooCoarse

from conftest import semicircle_pdf


@given(st.floats(-3, 3), st.floats(0.05, 4))
@settings(max_examples=40, deadline=None)
def test_v_single_atom_closed_form(u, t):
    m = MeasureSpec.dirac(0.5)
    exact = math.sqrt(max(t - (u - 0.5) ** 2, 0.0))
    assert abs(sb.v_t(m, t, u).v - exact) < 1e-12


def test_v_cauchy_examples(cauchy):
    assert abs(sb.v_t(cauchy, 1.0, 0.0).v - (math.sqrt(5) - 1) / 2) < 1e-13
    assert abs(sb.v_t(cauchy, 1.0, 10.0).v - co.cauchy_v(1.0, 10.0)) < 1e-12


@pytest.mark.parametrize("m", [MeasureSpec.cauchy(), MeasureSpec.semicircle(0.7),
                               MeasureSpec.atoms([(-1.0, 1 / 3), (1.0, 2 / 3)]),
                               MeasureSpec.uniform(-2, 1)])
def test_flow_point_invariants(m):
    t = 0.8
    for u in np.linspace(-4, 4, 41):
        fp = sb.v_t(m, t, u)
        assert 0.0 <= fp.v <= math.sqrt(t)
        if fp.v > 0:
            assert abs(kernel_bundle(m, u, fp.v).i0 - 1 / t) <= 1e-10 / t
            # boundary realness of H
            assert abs(sb.h_map(m, t, complex(u, fp.v)).imag) <= 1e-9


def test_v_decays_far_out(cauchy):
    assert sb.v_t(cauchy, 1.0, 200.0).v < 0.01
    assert sb.v_t(cauchy, 1.0, -200.0).v < 0.01


def test_support_components_examples(dirac, two_atoms, cauchy):
    comps = sb.support_components(dirac, 1.0, (-3, 3, 0.01))
    assert len(comps) == 1
    a, b = comps.intervals[0]
    assert abs(a + 1) < 1e-11 and abs(b - 1) < 1e-11

    comps = sb.support_components(two_atoms, 0.05, (-3, 3, 0.01))
    assert len(comps) == 2
    for (a, b), x in zip(comps.intervals, (-1.0, 1.0)):
        assert a < x < b

    comps = sb.support_components(cauchy, 0.3, (-50, 50, 1.0))
    assert len(comps) == 1 and comps.unbounded_below and comps.unbounded_above
    assert all(sb.v_t(cauchy, 0.3, u).v > 0 for u in np.linspace(-50, 50, 100))


def test_two_atom_components_against_rational_equation(two_atoms):
    # on the axis i0(u, 0) = (1/3)/(u+1)^2 + (2/3)/(u-1)^2 = 1/t
    t = 0.05

    def g(u):
        return (1 / 3) / (u + 1) ** 2 + (2 / 3) / (u - 1) ** 2 - 1 / t

    from scipy.optimize import brentq
    ends = [brentq(g, -2, -1 + 1e-9), brentq(g, -1 + 1e-9, 0), brentq(g, 0, 1 - 1e-9), brentq(g, 1 + 1e-9, 2)]
    comps = sb.support_components(two_atoms, t, (-3, 3, 0.01))
    got = [x for iv in comps.intervals for x in iv]
    assert np.allclose(got, ends, atol=1e-11)


def test_resolution_too_coarse(two_atoms):
    with pytest.raises(ResolutionTooCoarse):
        sb.support_components(two_atoms, 0.05, (-1.5, 1.5, 1.0))


def test_h_map_examples(dirac, cauchy):
    assert abs(sb.h_map(dirac, 1.0, 1j)) < 1e-15
    v = sb.v_t(cauchy, 1.0, 0.0).v
    assert abs(sb.h_map(cauchy, -1.0, 1j * v).real) < 1e-14
    rng = np.random.default_rng(3)
    locs, w = np.array([-2.0, 0.5, 3.0]), np.array([0.2, 0.5, 0.3])
    m = MeasureSpec.atoms(list(zip(locs, w)))
    for z in rng.normal(size=50) + 1j * rng.normal(size=50):
        exact = z + 2 * np.sum(w / (z - locs))
        assert abs(sb.h_map(m, 2.0, z) - exact) < 1e-12 * max(1, abs(exact))


def test_psi_examples(dirac, cauchy, two_atoms):
    for u in (-0.9, 0.0, 0.3):
        assert abs(sb.psi_t(dirac, 1.0, u) - 2 * u) < 1e-12
    for u in (-5.0, 0.0, 0.4, 12.0):
        assert abs(sb.psi_t(cauchy, 1.0, u) - co.psi(1.0, u)) < 1e-12 * max(1, abs(u))
    grid = np.linspace(-4, 4, 1000)
    psi = [sb.psi_t(two_atoms, 1.0, u) for u in grid]
    assert np.all(np.diff(psi) > 0)


def test_psi_derivative_matches_differences(cauchy, two_atoms):
    h = 1e-5
    for m, u in ((cauchy, 0.7), (two_atoms, 0.2), (two_atoms, 3.0)):
        fd = (sb.psi_t(m, 1.0, u + h) - sb.psi_t(m, 1.0, u - h)) / (2 * h)
        assert abs(sb.psi_t_derivative(m, 1.0, u) - fd) < 1e-7


def test_free_convolution_examples(dirac, semicircle):
    res = sb.free_convolution_density(dirac, 1.0, [0.0])
    assert res.x[0] == 0.0 and abs(res.density[0] - 1 / math.pi) < 1e-15
    res = sb.free_convolution_density(semicircle, 1.0, [0.0])
    assert abs(res.density[0] - math.sqrt(8) / (4 * math.pi)) < 1e-12


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_free_convolution_semicircle_law(semicircle, t):
    grid = np.linspace(-2.5, 2.5, 101)
    res = sb.free_convolution_density(semicircle, t, grid)
    assert np.all(np.diff(res.x) > 0)
    assert np.max(np.abs(res.density - semicircle_pdf(res.x, 1 + t))) < 1e-10


def test_free_convolution_trapezoid_mass(two_atoms):
    res = sb.free_convolution_density(two_atoms, 1.0, np.linspace(-3.5, 3.5, 4001))
    assert abs(np.trapezoid(res.density, res.x) - 1) < 1e-4


def test_dv_du_dirac_closed_form(dirac):
    analytic, fd = sb.v_t_derivative_fd_check(dirac, 1.0, 0.5)
    assert abs(analytic + 0.5 / math.sqrt(0.75)) < 1e-12
    assert abs(analytic - fd) < 1e-6


def test_dv_du_cauchy(cauchy):
    analytic, fd = sb.v_t_derivative_fd_check(cauchy, 1.0, 1.0)
    assert abs(analytic - fd) < 1e-6


def test_dv_du_symmetric_center():
    m = MeasureSpec.atoms([(-1.0, 0.5), (1.0, 0.5)])
    analytic, fd = sb.v_t_derivative_fd_check(m, 2.0, 0.0)
    assert analytic == 0.0 and abs(fd) < 1e-6


def test_convolution_table_examples(dirac, semicircle, cauchy):
    tab = sb.convolution_table(dirac, 1.0, 201)
    assert abs(tab.density.max() - 1 / math.pi) < 1e-9
    assert np.max(np.abs(tab.density - semicircle_pdf(tab.x, 1.0))) < 1e-8
    tab = sb.convolution_table(semicircle, 1.0, 201)
    assert np.max(np.abs(tab.density - semicircle_pdf(tab.x, 2.0))) < 1e-8
    assert abs(sb.convolution_table(cauchy, 1.0, 201).mass - 1) < 1e-4


def test_injected_error_only_inside_block(cauchy):
    clean = sb.v_t(cauchy, 1.0, 0.0).v
    with sb.injected_v_error(1e-3):
        assert abs(sb.v_t(cauchy, 1.0, 0.0).v / clean - 1 - 1e-3) < 1e-12
    assert sb.v_t(cauchy, 1.0, 0.0).v == clean
