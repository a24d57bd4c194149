import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from dynit.errors import DomainError
from dynit.specfun import (CROSSOVER, exp_scaled_expn, exp_scaled_gamma0, log_factorial,
                           upper_gamma0)

# Frozen from mpmath at 30 digits.
E1_ONE = 0.21938393439552027
E1_HALF = 0.55977359477616081
SCALED_E1_50 = 0.01961510993011487
SCALED_E3_2P5 = 0.19851823901870031


def test_frozen_points():
    assert upper_gamma0(1.0) == pytest.approx(E1_ONE, rel=1e-14)
    assert upper_gamma0(0.5) == pytest.approx(E1_HALF, rel=1e-14)
    assert exp_scaled_gamma0(50.0) == pytest.approx(SCALED_E1_50, rel=1e-14)
    assert exp_scaled_expn(3, 2.5) == pytest.approx(SCALED_E3_2P5, rel=1e-14)


@pytest.mark.parametrize("x", [1e-12, 1e-6, 0.3, CROSSOVER, 1.0 + 1e-12, 7.5, 80.0, 700.0])
def test_e1_against_scipy(x):
    assert upper_gamma0(x) == pytest.approx(special.exp1(x), rel=1e-13)


def test_crossover_is_continuous():
    below = upper_gamma0(np.nextafter(CROSSOVER, 0))
    above = upper_gamma0(np.nextafter(CROSSOVER, 2))
    assert abs(below - above) < 1e-14


@given(st.floats(min_value=1e-10, max_value=1e4))
@settings(max_examples=200, deadline=None)
def test_scaled_e1_matches_mpmath(x):
    ref = float(mpmath.exp(x) * mpmath.e1(x))
    assert exp_scaled_gamma0(x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 13])
@pytest.mark.parametrize("x", [0.01, 0.7, 1.0, 3.0, 40.0, 900.0])
def test_scaled_expn(n, x):
    ref = float(mpmath.exp(x) * mpmath.expint(n, x))
    assert exp_scaled_expn(n, x) == pytest.approx(ref, rel=1e-13)


def test_vectorized_shape():
    x = np.linspace(0.1, 5, 12).reshape(3, 4)
    assert upper_gamma0(x).shape == (3, 4)
    assert np.allclose(upper_gamma0(x), special.exp1(x), rtol=1e-13)


@pytest.mark.parametrize("x", [1e8, 8.49e16, 1e300])
def test_scaled_e1_huge_argument(x):
    # the continued fraction must stop even when δ sits one ulp from 1
    assert exp_scaled_gamma0(x) == pytest.approx(1.0 / x, rel=1e-12)


def test_bounds_and_underflow():
    # x e^x E1(x) lies in (x/(x+1), 1)
    x = np.logspace(-3, 3, 50)
    y = x * exp_scaled_gamma0(x)
    assert np.all(y < 1) and np.all(y > x / (x + 1))
    assert upper_gamma0(800.0) == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_domain(bad):
    with pytest.raises(DomainError):
        upper_gamma0(bad)


@pytest.mark.parametrize("k", [0, 1, 2, 10, 20, 21, 170, 400])
def test_log_factorial(k):
    assert log_factorial(k) == pytest.approx(math.lgamma(k + 1), rel=1e-14, abs=1e-15)
