import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brownmeasure.errors import BracketFailure, QuadratureError
from brownmeasure.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, gauss_kronrod
from brownmeasure.roots import bisect, safeguarded_newton


def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    sel = GAUSS_WEIGHTS > 0
    assert np.allclose(NODES[sel], x, atol=1e-15)
    assert np.allclose(GAUSS_WEIGHTS[sel], w, atol=1e-15)


def test_kronrod_rule_exact_to_degree_22():
    for k in range(23):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(np.dot(KRONROD_WEIGHTS, NODES**k) - exact) < 1e-14
    assert abs(np.dot(KRONROD_WEIGHTS, NODES**24) - 2.0 / 25) > 1e-10


def test_gauss_kronrod_vector_integrand():
    def f(x):
        return np.stack([np.exp(x), np.cos(x)])

    val, err = gauss_kronrod(f, [0.0, 1.0, 3.0])
    assert abs(val[0] - (math.e**3 - 1)) < 1e-12
    assert abs(val[1] - math.sin(3.0)) < 1e-13
    assert np.all(err < 1e-10)


def test_gauss_kronrod_peaked_integrand():
    c = 1e-4
    val, _ = gauss_kronrod(lambda x: (c / (x * x + c * c))[None], [-1.0, 0.0, 1.0])
    assert abs(val[0] - 2 * math.atan(1 / c)) < 1e-10


def test_gauss_kronrod_rejects_nan():
    with pytest.raises(QuadratureError):
        gauss_kronrod(lambda x: (x * np.nan)[None], [0.0, 1.0])


def test_bisect_reaches_adjacent_floats():
    root = bisect(lambda x: x * x - 2.0, 0.0, 2.0)
    assert abs(root - math.sqrt(2.0)) <= 2 * np.spacing(math.sqrt(2.0))


def test_bisect_needs_sign_change():
    with pytest.raises(BracketFailure):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0)


@given(st.floats(0.01, 100.0))
@settings(max_examples=50, deadline=None)
def test_newton_cube_root(a):
    root = safeguarded_newton(lambda x: (x**3 - a, 3 * x * x), 0.0, max(1.0, a))
    assert abs(root - a ** (1 / 3)) < 1e-12 * max(1.0, a)


def test_newton_survives_flat_start():
    # Newton from the flat point would leave the bracket; bisection takes over.
    root = safeguarded_newton(lambda x: (math.atan(x - 3.0), 1 / (1 + (x - 3.0) ** 2)), -50.0, 60.0,
                              x0=-50.0)
    assert abs(root - 3.0) < 1e-12
