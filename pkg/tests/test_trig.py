"""Exactness properties of the dyadic-reduction trig helpers."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import given, strategies as st

from holderlab.trig import cospi, cospi_array, sinpi, sinpi_array


def test_integer_arguments_vanish_exactly():
    for t in [0.0, 1.0, 2.0, 3.0, -1.0, 17.0, float(2**20), float(2**40), -float(2**13)]:
        assert sinpi(t) == 0.0


def test_half_integers_are_exact():
    assert sinpi(0.5) == 1.0
    assert sinpi(1.5) == -1.0
    assert sinpi(2.5) == 1.0
    assert sinpi(-0.5) == -1.0
    assert cospi(0.0) == 1.0
    assert cospi(1.0) == -1.0
    assert cospi(0.5) == 0.0
    assert cospi(1.5) == 0.0


def test_matches_plain_sin_away_from_special_points():
    for t in [0.123, 0.77, 1.31, 2.9, -0.4, 13.37]:
        assert abs(sinpi(t) - math.sin(math.pi * t)) < 5e-15
        assert abs(cospi(t) - math.cos(math.pi * t)) < 5e-15


@given(st.integers(min_value=-(2**40), max_value=2**40))
def test_property_integers_vanish(n):
    assert sinpi(float(n)) == 0.0


@given(st.integers(min_value=0, max_value=50), st.integers(min_value=0, max_value=50))
def test_property_dyadic_zeros(k, n):
    # sin(2**(k-n) * pi) must vanish exactly once the exponent is nonnegative
    t = math.ldexp(1.0, k - n)
    if k >= n:
        assert sinpi(t) == 0.0
    else:
        assert sinpi(t) > 0.0


def test_array_agrees_with_scalar():
    ts = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 0.123, -0.75, 7.25, 1024.0])
    np.testing.assert_array_equal(sinpi_array(ts), [sinpi(t) for t in ts])
    np.testing.assert_array_equal(cospi_array(ts), [cospi(t) for t in ts])


def test_periodicity_is_exact_for_dyadic_t():
    # t + 2.0 must itself be exact for this to be a fair comparison
    for t in [0.25, 1.125, 0.3125, 0.046875]:
        assert sinpi(t + 2.0) == sinpi(t)
        assert cospi(t + 2.0) == cospi(t)
