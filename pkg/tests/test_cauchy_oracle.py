import math

import numpy as np
import pytest

from brownmeasure import cauchy_oracle as co
from brownmeasure.errors import NegativeSquare


@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
def test_peak_and_cubic(t):
    top = co.cauchy_v(t, 0.0)
    assert abs(top - (-1 + math.sqrt(1 + 4 * t)) / 2) < 1e-15
    for u in (0.3, 2.0, 50.0):
        v = co.cauchy_v(t, u)
        assert abs(co.cubic_residual(t, u, v)) <= 1e-12 * max(1.0, u * u * v)


def test_tail_decay():
    assert abs(co.cauchy_v(1.0, 100.0) * 100**2 - 1) < 0.05


def test_circular_density():
    assert abs(co.circular_density(1.0, 1e4) * 2 * math.pi - 1) < 1e-6
    v = (math.sqrt(5) - 1) / 2
    plug = (1 + 4 * v * v * (1 + v) ** 2) / ((1 + v) * (1 + 2 * v * v * (1 + v))) / (2 * math.pi)
    assert abs(co.circular_density(1.0, 0.0) - plug) < 1e-15
    assert abs(co.circular_density(1.0, 0.0) - co.psi_derivative(1.0, 0.0) / (2 * math.pi)) < 1e-15


def test_elliptic_boundary():
    a, b = 1 / 8, 7 / 8
    assert co.elliptic_boundary_u2(a, b, co.elliptic_peak(a, b)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(NegativeSquare):
        co.elliptic_boundary_u2(a, b, 1.1 * co.elliptic_peak(a, b))
    # alpha = 0 reduction
    for bb in (0.2, 0.9):
        assert abs(co.elliptic_boundary_u2(0.0, 1.0, bb) - (4 - 2 * bb - bb * bb) / (bb * (bb + 2))) < 1e-13
    # order 1/u^2 height decay: b u^2 tends to a constant
    c1 = 1e-4 * co.elliptic_boundary_u2(a, b, 1e-4)
    c2 = 1e-6 * co.elliptic_boundary_u2(a, b, 1e-6)
    assert abs(c1 / c2 - 1) < 1e-3


def test_elliptic_peak_alpha_zero_matches_imaginary_phi():
    assert abs(co.elliptic_peak(0.0, 1.0) - co.isigma_phi(1.0, 0.0)) < 1e-15


def test_elliptic_density_limits_and_reductions():
    a, b = 1 / 8, 7 / 8
    assert abs(co.elliptic_density(a, b, 1e4) * 4 * math.pi * b - 1) < 1e-6
    for u in np.linspace(-10, 10, 200):
        assert abs(co.elliptic_density(0.0, 1.0, u) - co.isigma_density(1.0, u)) < 1e-10
        assert abs(co.elliptic_density(0.5, 0.5, u) - co.circular_density(1.0, u)) < 1e-10


def test_isigma():
    assert abs(co.isigma_density(1.0, 0.0) - math.sqrt(5) / (4 * math.pi)) < 1e-15
    assert abs(co.isigma_density(1.0, 1e4) * 4 * math.pi - 1) < 1e-6
    assert abs(co.isigma_mass(1.0) - 1) < 1e-4


def test_affine_covariance():
    m, g, t = 2.0, 3.0, 1.5
    for u in (-4.0, 2.0, 7.5):
        assert abs(co.cauchy_v(t, u, m, g) - g * co.cauchy_v(t / g**2, (u - m) / g)) < 1e-15
        assert abs(co.circular_density(t, u, m, g) * g * g - co.circular_density(t / g**2, (u - m) / g)) < 1e-15


def test_spacing_zero():
    u0, v = co.spacing_zero(1.0)
    assert abs(v - (-3 + math.sqrt(15)) / 6) < 1e-12
    assert abs(u0 - 2.5614) < 1e-4
    assert abs(co.cubic_residual(1.0, u0, v)) < 1e-12
