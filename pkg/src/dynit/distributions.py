"""Demand → PU SINR → interference-threshold distribution chain.

PU capacity demand c is zero-truncated Poisson on {1, 2, ...}; the PU SINR is
γ_p = eᶜ − 1, so its support is α_k = eᵏ − 1 and every factorial in the
mixture weights is an ordinary integer factorial. The threshold
ψ = g_pp·p/γ_p is then a finite mixture of exponentials with rates
λ_pp·α_k/p once the Poisson tail is cut at K.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError, SeriesTruncationError
from .specfun import log_factorial

LAMBDA_P_FLOOR = 1e-9
DEFAULT_TAIL_TOL = 1e-12
MAX_TERMS = 400


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(lin)


@dataclass(frozen=True)
class Scenario:
    """Link parameters. Channel gains are exponential with the given *rates*
    (mean = 1/rate); ``p_peak`` is linear power shared by PU and SU."""

    lambda_p: float
    lambda_pp: float
    lambda_sp: float
    lambda_ss: float
    lambda_ps: float
    sigma2: float
    p_peak: float
    bandwidth: float = 1.0

    def __post_init__(self):
        for name in ("lambda_p", "lambda_pp", "lambda_sp", "lambda_ss",
                     "lambda_ps", "sigma2", "p_peak", "bandwidth"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")

    @classmethod
    def standard(cls, lambda_p: float = 2.0, p_db: float = 10.0, **overrides) -> "Scenario":
        """Default channel rates: E[g_sp]=2, E[g_ps]=3.3,
        E[g_ss]=5, E[g_pp]=4, σ²=1."""
        base = dict(lambda_p=lambda_p, lambda_pp=1 / 4, lambda_sp=1 / 2,
                    lambda_ss=1 / 5, lambda_ps=1 / 3.3, sigma2=1.0,
                    p_peak=float(db_to_linear(p_db)))
        base.update(overrides)
        return cls(**base)

    @property
    def eta(self) -> float:
        return self.lambda_pp / self.lambda_sp

    @property
    def p_db(self) -> float:
        return float(linear_to_db(self.p_peak))

    def with_(self, **changes) -> "Scenario":
        if "p_db" in changes:
            changes["p_peak"] = float(db_to_linear(changes.pop("p_db")))
        return replace(self, **changes)


def _clamped(lambda_p: float) -> float:
    if not lambda_p > 0:
        raise DomainError(f"lambda_p must be > 0, got {lambda_p!r}")
    return max(lambda_p, LAMBDA_P_FLOOR)


def _log_zt_norm(lam: float) -> float:
    # ln(e^λ − 1)
    return math.log(math.expm1(lam))


def zt_poisson_pmf(k: int, lambda_p: float) -> float:
    """P(c = k) for the zero-truncated Poisson law, k >= 1."""
    if k < 1:
        raise DomainError("zero-truncated support starts at k = 1")
    lam = _clamped(lambda_p)
    return math.exp(k * math.log(lam) - log_factorial(k) - _log_zt_norm(lam))


def poisson_pmf(k: int, lambda_p: float) -> float:
    if k < 0:
        raise DomainError("Poisson support starts at k = 0")
    return math.exp(k * math.log(lambda_p) - lambda_p - log_factorial(k))


def sinr_pmf(k: int, scn: Scenario) -> float:
    """P(γ_p = eᵏ − 1)."""
    return zt_poisson_pmf(k, scn.lambda_p)


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """First K terms of the demand law: weights w_k on SINR atoms α_k."""

    K: int
    weights: np.ndarray
    alphas: np.ndarray
    lambda_p: float
    tail: float  # zero-truncated mass beyond K

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.K + 1)


@functools.lru_cache(maxsize=256)
def _series_cached(lambda_p: float, tail_tol: float, cap: int) -> TruncatedSeries:
    lam = _clamped(lambda_p)
    n = cap + 200
    ks = np.arange(1, n + 1)
    log_fact = np.array([log_factorial(int(k)) for k in ks])
    w = np.exp(ks * math.log(lam) - log_fact - _log_zt_norm(lam))
    # tails[j] = mass strictly beyond k = j + 1; summed smallest-first.
    tails = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
    hits = np.nonzero(tails < tail_tol)[0]
    if hits.size == 0 or hits[0] + 1 > cap:
        raise SeriesTruncationError(
            f"lambda_p={lambda_p} needs more than {cap} terms for tail {tail_tol}")
    K = int(hits[0] + 1)
    # Same code path as zt_poisson_pmf so weights and pmf agree bit for bit.
    weights = np.array([zt_poisson_pmf(k, lam) for k in range(1, K + 1)])
    weights.setflags(write=False)
    alphas = np.expm1(np.arange(1, K + 1, dtype=float))
    alphas.setflags(write=False)
    return TruncatedSeries(K, weights, alphas, lam, float(tails[K - 1]))


def build_series(scn: Scenario | float, tail_tol: float = DEFAULT_TAIL_TOL,
                 cap: int = MAX_TERMS) -> TruncatedSeries:
    """Smallest K whose zero-truncated tail mass is below ``tail_tol``.

    Accepts a Scenario or a bare λ_p.
    """
    if not (0 < tail_tol <= 1e-3):
        raise DomainError(f"tail_tol must lie in (0, 1e-3], got {tail_tol!r}")
    lam = scn.lambda_p if isinstance(scn, Scenario) else float(scn)
    return _series_cached(float(lam), float(tail_tol), int(cap))


def sinr_cdf(x, series: TruncatedSeries):
    """P(γ_p <= x) from the truncated series."""
    x = np.asarray(x, dtype=float)
    cum = np.cumsum(series.weights)
    idx = np.searchsorted(series.alphas, x, side="right")
    out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class MixtureExp:
    """Σ w_k Exp(r_k): the interference-plus-noise threshold ψ."""

    rates: np.ndarray
    weights: np.ndarray
    series: TruncatedSeries = field(repr=False)

    def mean(self) -> float:
        return float(np.sum(self.weights / self.rates))


def psi_mixture(scn: Scenario, series: TruncatedSeries | None = None) -> MixtureExp:
    series = series or build_series(scn)
    rates = scn.lambda_pp * series.alphas / scn.p_peak
    return MixtureExp(rates, series.weights, series)


def psi_pdf(x, mix: MixtureExp):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("psi_pdf needs x > 0")
    r = mix.rates
    out = np.exp(-np.multiply.outer(x, r)) @ (mix.weights * r)
    return out[()] if out.ndim == 0 else out


def psi_cdf(x, mix: MixtureExp):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("psi_cdf needs x >= 0")
    out = -np.expm1(-np.multiply.outer(x, mix.rates)) @ mix.weights
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class AtomicMin:
    """Law of min(T, a) for a continuous T: continuous part below ``atom_location``
    and the remaining mass 1 − F_T(a⁻) sitting on the atom."""

    continuous_cdf: Callable
    atom_location: float

    @property
    def atom_mass(self) -> float:
        return 1.0 - float(self.continuous_cdf(self.atom_location))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.atom_location, 1.0, self.continuous_cdf(x))
        return out[()] if out.ndim == 0 else out
