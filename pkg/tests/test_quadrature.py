import math

import numpy as np
import pytest

from dynit.errors import QuadratureError
from dynit.quadrature import integrate, integrate_semi_infinite


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (np.exp, -1.0, 2.0, math.e**2 - math.exp(-1)),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2.0 / 3.0),
    (lambda x: 1.0 / (1.0 + x * x), -50.0, 50.0, 2 * math.atan(50.0)),
])
def test_finite(f, a, b, exact):
    res = integrate(f, a, b, abs_tol=1e-12)
    assert res.value == pytest.approx(exact, abs=1e-11)
    assert res.abs_err <= 1e-12


@pytest.mark.parametrize("rate", [1e-2, 1.0, 1e4])
def test_semi_infinite_exponential(rate):
    res = integrate_semi_infinite(lambda x: rate * np.exp(-rate * x), abs_tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-11)


def test_semi_infinite_log_tail():
    # ∫ ln(1+x)/(1+x)^3 dx = 1/4
    res = integrate_semi_infinite(lambda x: np.log1p(x) / (1 + x) ** 3, abs_tol=1e-12)
    assert res.value == pytest.approx(0.25, abs=1e-11)


def test_non_finite_reports_interval():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)
    lo, hi = info.value.interval
    assert hi > 0.5


def test_limit_reports_worst_interval():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / x) / x, 1e-9, 1.0, abs_tol=1e-14, limit=50)
    assert info.value.interval[0] < 0.1
