import math

import mpmath as mp
import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings, strategies as st

from yosida.special import (bessel_i0, bessel_i0e, bessel_i1, bessel_i1_over_x, bessel_i1e,
                            bessel_i1e_over_x)


def test_values_at_zero():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i1(0.0) == 0.0
    assert bessel_i1_over_x(0.0) == 0.5


def test_leading_asymptotic():
    assert abs(bessel_i0(30.0) * math.sqrt(2 * math.pi * 30) * math.exp(-30) - 1) <= 1e-2


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        bessel_i0(-1.0)
    with pytest.raises(ValueError):
        bessel_i1(np.array([1.0, -0.5]))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 700))
def test_against_mpmath(x):
    mp.mp.dps = 30
    for nu, fn in ((0, bessel_i0), (1, bessel_i1)):
        ref = float(mp.besseli(nu, x))
        assert abs(float(fn(x)) - ref) <= 1e-10 * abs(ref) + 1e-300


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e5))
def test_scaled_against_scipy(x):
    assert float(bessel_i0e(x)) == pytest.approx(float(sps.i0e(x)), rel=1e-10)
    assert float(bessel_i1e(x)) == pytest.approx(float(sps.i1e(x)), rel=1e-10, abs=1e-300)


def test_i1_over_x_small_and_large():
    x = np.array([1e-12, 1e-6, 0.3, 5.0, 25.0, 200.0])
    ref = sps.i1e(x) / x
    assert np.allclose(bessel_i1e_over_x(x), ref, rtol=1e-10)
    assert np.allclose(bessel_i1_over_x(x[:5]), sps.i1(x[:5]) / x[:5], rtol=1e-10)


def test_vectorized_matches_scalar():
    x = np.linspace(0, 60, 301)
    v = bessel_i0(x)
    assert all(v[k] == bessel_i0(float(x[k])) for k in range(0, 301, 37))


def test_series_asymptotic_junction_is_continuous():
    lo, hi = bessel_i0e(np.nextafter(20.0, 0)), bessel_i0e(np.nextafter(20.0, 40))
    assert abs(lo - hi) <= 1e-10 * lo


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 3))
def test_derivative_identities(x, y, a):
    # d/dx I0(2 sqrt(a x y)) = sqrt(a y / x) I1(2 sqrt(a x y)), d^2/dxdy = a I0(2 sqrt(a x y))
    mp.mp.dps = 30
    k = lambda X, Y: mp.besseli(0, 2 * mp.sqrt(a * X * Y))
    z = 2 * math.sqrt(a * x * y)
    dx = float(mp.diff(lambda X: k(X, y), x))
    assert dx == pytest.approx(math.sqrt(a * y / x) * float(bessel_i1(z)), rel=1e-9)
    dxy = float(mp.diff(k, (x, y), (1, 1)))
    assert dxy == pytest.approx(a * float(bessel_i0(z)), rel=1e-9)
