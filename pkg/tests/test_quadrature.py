import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgpwnn.mesh import build_uniform_mesh
from dgpwnn.quadrature import default_order, face_quadrature, gauss_legendre_1d, volume_quadrature


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 24, 40, 64])
def test_matches_numpy_leggauss(n):
    x, w = gauss_legendre_1d(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, xr, atol=1e-14)
    np.testing.assert_allclose(w, wr, atol=1e-14)


def test_two_point_rule():
    x, w = gauss_legendre_1d(2)
    np.testing.assert_allclose(x, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(w, [1, 1], atol=1e-15)


@given(st.integers(1, 30))
@settings(max_examples=30, deadline=None)
def test_exact_for_polynomials(n):
    x, w = gauss_legendre_1d(n)
    assert np.isclose(w.sum(), 2.0, atol=1e-13)
    for p in range(2 * n):
        exact = 0.0 if p % 2 else 2.0 / (p + 1)
        assert abs(np.dot(w, x**p) - exact) < 1e-13


@pytest.mark.parametrize("n", [0, 65, -3])
def test_out_of_range(n):
    with pytest.raises(ValueError):
        gauss_legendre_1d(n)


def test_face_rule_integrates_face_area_and_moments():
    mesh = build_uniform_mesh([0, 0, 0], [1, 2, 3], (1, 2, 3))
    for f in mesh.faces:
        rule = face_quadrature(f, 4)
        assert len(rule) == 16
        assert np.isclose(rule.weights.sum(), f.measure)
        assert np.allclose(rule.points[:, f.axis], f.coord)
        mid = 0.5 * (f.lo + f.hi)
        np.testing.assert_allclose(rule.weights @ rule.points / f.measure, mid, atol=1e-14)


def test_volume_rule_oscillatory_integral():
    lo, hi = np.array([0.0, 0.0]), np.array([0.5, 1.0])
    k = np.array([3.0, -2.0])
    rule = volume_quadrature(lo, hi, 20)
    approx = np.sum(rule.weights * np.exp(1j * rule.points @ k))
    exact = np.prod((np.exp(1j * k * hi) - np.exp(1j * k * lo)) / (1j * k))
    assert abs(approx - exact) < 1e-14


def test_default_order():
    assert default_order(1.0, 1.0) == 10
    assert default_order(4 * np.pi, 1.0) == 21
    assert default_order(1e6, 1.0) == 64


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 50.0), st.floats(0.1, 2.0))
def test_default_order_resolves_wave_products(k, length):
    # the fastest product of two waves, exp(2ik x), integrated exactly over [0, length]
    t, w = gauss_legendre_1d(default_order(k, length))
    x, w = 0.5 * length * (t + 1), 0.5 * length * w
    exact = (np.exp(2j * k * length) - 1) / (2j * k)
    approx = np.sum(w * np.exp(2j * k * x))
    assert abs(approx - exact) <= 1e-12 * max(length, 1.0)
