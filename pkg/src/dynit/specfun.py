"""Scalar special functions used by the closed-form outage and capacity expressions.

Everything here accepts a float or an ndarray and returns the same shape.
``upper_gamma0`` is Γ(0, x) = E1(x); the exp-scaled variants return eˣ·E_n(x)
and never overflow, which is how every analytic expression consumes them.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

# Series branch below this point, continued fraction at and above it.
CROSSOVER = 1.0

_SERIES_TERMS = 30
_CF_EPS = 3e-16  # one ulp either side of 1; smaller can stall
_CF_MAX_ITER = 2000
_TINY = 1e-300
# exp(-x) underflows to zero beyond this.
_UNDERFLOW_X = 745.2


def _as_positive_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be > 0, got min {np.min(arr)!r}")
    return arr


def _e1_series(x: np.ndarray) -> np.ndarray:
    # -gamma - ln x + sum_{n>=1} (-1)^(n+1) x^n / (n n!)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for n in range(1, _SERIES_TERMS + 1):
        term = term * x / n
        total += (term / n) if n % 2 else -(term / n)
    return -EULER_GAMMA - np.log(x) + total


def _expn_cf_scaled(n: int, x: np.ndarray) -> np.ndarray:
    """eˣ·E_n(x) by modified Lentz on the even continued fraction, x >= 1."""
    b = x + n
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _CF_MAX_ITER):
        a = -i * (n - 1 + i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            return h
    raise ArithmeticError("continued fraction for E_n did not converge")


def upper_gamma0(x):
    """Γ(0, x) = ∫ₓ^∞ e⁻ᵗ/t dt for x > 0; exactly 0 once e⁻ˣ underflows."""
    x = _as_positive_array(x)
    out = np.empty_like(x)
    small = x < CROSSOVER
    big = ~small & (x < _UNDERFLOW_X)
    out[small] = _e1_series(x[small])
    out[big] = np.exp(-x[big]) * _expn_cf_scaled(1, x[big])
    out[x >= _UNDERFLOW_X] = 0.0
    return out[()] if out.ndim == 0 else out


def exp_scaled_gamma0(x):
    """eˣ·Γ(0, x), finite for any x > 0 (behaves like 1/x for large x)."""
    x = _as_positive_array(x)
    out = np.empty_like(x)
    small = x < CROSSOVER
    out[small] = np.exp(x[small]) * _e1_series(x[small])
    out[~small] = _expn_cf_scaled(1, x[~small])
    return out[()] if out.ndim == 0 else out


def exp_scaled_expn(n: int, x):
    """eˣ·E_n(x) for integer n >= 1 and x > 0.

    Below the crossover the upward recurrence E_{n+1} = (e⁻ˣ − x E_n)/n is
    used; it damps errors there because x < 1.
    """
    if n < 1:
        raise DomainError(f"order must be >= 1, got {n}")
    x = _as_positive_array(x)
    out = np.empty_like(x)
    small = x < CROSSOVER
    xs = x[small]
    e = np.exp(xs) * _e1_series(xs)
    for m in range(1, n):
        e = (1.0 - xs * e) / m
    out[small] = e
    out[~small] = _expn_cf_scaled(n, x[~small])
    return out[()] if out.ndim == 0 else out


def log_factorial(k: int) -> float:
    """ln(k!) for integer k >= 0."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if k <= 20:
        return math.fsum(math.log(j) for j in range(2, k + 1))
    return math.lgamma(k + 1.0)
