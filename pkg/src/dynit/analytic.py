"""Closed-form SU transmit/receive power laws, outage probability and mean capacity.

Notation inside this module: h(z) = eᶻ·Γ(0, z) (see ``specfun.exp_scaled_gamma0``).
Each summand of the outage series is written as

    (λ_ps·ηα_k·λ_ss·x·σ⁴/p²) · e^{-λ_ss σ² x / p} · R(D_k, C_k)

with D_k = (λ_ps − ηα_k λ_ss x)σ²/p, C_k = (ηα_k + 1)λ_ss σ² x/p and
R(D, C) = [(1 + D)h(C) − D/(C + D) − h(C + D)] / D². In the high-power
regime C_k drops the "+1" and the exponential factor disappears. R is
analytic at D = 0; near that point it is summed from its Taylor series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import (DEFAULT_TAIL_TOL, AtomicMin, Scenario,
                            TruncatedSeries, build_series)
from .errors import ConditioningError, DomainError
from .quadrature import integrate, integrate_semi_infinite
from .specfun import exp_scaled_expn, exp_scaled_gamma0

RANGE_SLACK = 1e-9
DEFAULT_QUAD_TOL = 1e-8
GENERAL = "general"
HIGH_POWER = "high_power"

# Taylor window |D| < POLE_WINDOW·C; the expansion ratio is D/C.
POLE_WINDOW = 0.05
_POLE_TERMS = 12


@dataclass(frozen=True)
class OutageForm:
    """Which reading of the printed outage expressions to evaluate.

    leading_sign: sign on the (λ_ps − ηα_k λ_ss x)·e^{…} bracket term.
    factor_has_x: whether the (λ_ps − ηα_k λ_ss ·)σ²/p factor carries x.
    sum_sign: sign in front of the whole series.
    normalized: whether the series keeps the e^{-λ_p}/(1 − e^{-λ_p}) factor.
    """

    leading_sign: int = -1
    factor_has_x: bool = True
    sum_sign: int = 1
    normalized: bool = True


DERIVED = OutageForm()
# Literal readings of the typeset general and high-power expressions.
PRINTED_GENERAL = OutageForm(leading_sign=1, factor_has_x=False)
PRINTED_HIGH_POWER = OutageForm(leading_sign=1, normalized=False)


def _series(scn: Scenario, series: TruncatedSeries | None) -> TruncatedSeries:
    return series if series is not None else build_series(scn, DEFAULT_TAIL_TOL)


def _finish(out):
    return out[()] if out.ndim == 0 else out


def _positive(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"{name} must be > 0")
    return x


# ---------------------------------------------------------------- T = ψ/g_sp

def cdf_t(x, scn: Scenario, series: TruncatedSeries | None = None):
    """P(ψ/g_sp <= x)."""
    s = _series(scn, series)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("cdf_t needs x >= 0")
    a = scn.eta * s.alphas
    ax = np.multiply.outer(x, a)
    return _finish((ax / (ax + scn.p_peak)) @ s.weights)


def pdf_t(x, scn: Scenario, series: TruncatedSeries | None = None):
    s = _series(scn, series)
    x = _positive(x)
    a = scn.eta * s.alphas
    p = scn.p_peak
    return _finish((a * p / (np.multiply.outer(x, a) + p) ** 2) @ s.weights)


def ptx_law(scn: Scenario, series: TruncatedSeries | None = None) -> AtomicMin:
    s = _series(scn, series)
    return AtomicMin(lambda v: cdf_t(v, scn, s), scn.p_peak)


def cdf_ptx(x, scn: Scenario, series: TruncatedSeries | None = None):
    """CDF of P_tx = min(ψ/g_sp, p): equals cdf_t below p and 1 from p on."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("cdf_ptx needs x >= 0")
    return ptx_law(scn, series).cdf(x)


def cdf_prx(x, scn: Scenario, series: TruncatedSeries | None = None):
    """CDF of the SU received power P_tx·g_ss."""
    s = _series(scn, series)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("cdf_prx needs x >= 0")
    out = np.zeros(x.shape)
    pos = x > 0
    xs = x[pos]
    u = scn.lambda_ss * xs / scn.p_peak
    a = scn.eta * s.alphas
    # e^{ηα u}Γ(0, (ηα+1)u) = e^{-u}·h((ηα+1)u)
    terms = np.multiply.outer(u, a) * exp_scaled_gamma0(np.multiply.outer(u, a + 1.0))
    out[pos] = 1.0 - np.exp(-u) * (1.0 - terms @ s.weights)
    return _finish(out)


# ------------------------------------------------------------ series kernel

def _taylor_kernel(D, C):
    t = -D / C
    total = np.zeros_like(D)
    power = np.ones_like(D)
    for n in range(2, 2 + _POLE_TERMS):
        total += power * ((n - 1) + C * exp_scaled_expn(n, C)) / n
        power = power * t
    return total / (C * C)


def pole_kernel(D, C, S=None):
    """R(D, C) = [(1 + D)h(C) − D/(C + D) − h(C + D)]/D² for C > 0, C + D > 0.

    ``S`` is C + D when the caller has it in closed form; forming it here by
    addition cancels badly once C ≫ C + D.
    """
    D, C = np.broadcast_arrays(np.asarray(D, dtype=float), np.asarray(C, dtype=float))
    S = C + D if S is None else np.broadcast_to(np.asarray(S, dtype=float), D.shape)
    out = np.empty(D.shape)
    near = np.abs(D) < POLE_WINDOW * C
    if near.any():
        out[near] = _taylor_kernel(D[near], C[near])
    far = ~near
    if far.any():
        d, c, cd = D[far], C[far], S[far]
        num = (1.0 + d) * exp_scaled_gamma0(c) - d / cd - exp_scaled_gamma0(cd)
        out[far] = num / (d * d)
    return _finish(out)


def _weights(s: TruncatedSeries, form: OutageForm):
    if form.normalized:
        return s.weights
    return s.weights * np.expm1(s.lambda_p)


def _series_terms(x, scn, s, regime):
    """Per-(x, k) summands of the derived outage series, without weights."""
    p, s2 = scn.p_peak, scn.sigma2
    lps, lss = scn.lambda_ps, scn.lambda_ss
    ea = scn.eta * s.alphas
    xk = x[:, None]
    D = (lps - ea * lss * xk) * s2 / p
    if regime == GENERAL:
        C = (ea + 1.0) * lss * s2 * xk / p
        S = (lps + lss * xk) * s2 / p
        scale = np.exp(-lss * s2 * x / p)[:, None]
    else:
        C = ea * lss * s2 * xk / p
        S = lps * s2 / p
        scale = 1.0
    pre = lps * ea * lss * xk * s2 * s2 / (p * p)
    return pre * scale * pole_kernel(D, C, S)


def _literal_terms(x, scn, s, regime, form):
    """Summands evaluated term by term as typeset, with the ``form`` switches."""
    p, s2 = scn.p_peak, scn.sigma2
    lps, lss = scn.lambda_ps, scn.lambda_ss
    ea = scn.eta * s.alphas
    xk = x[:, None]
    A = lps - ea * lss * xk
    factor = (A if form.factor_has_x else (lps - ea * lss)) * s2 / p
    if regime == GENERAL:
        B = lps + lss * xk
        C = (ea + 1.0) * lss * s2 * xk / p
        bracket = (form.leading_sign * A
                   + B * ((1.0 + factor) * exp_scaled_gamma0(C)
                          - exp_scaled_gamma0(B * s2 / p)))
        return (ea * lps * lss * xk / (A * A * B)) * np.exp(-lss * s2 * xk / p) * bracket
    C = ea * lss * s2 * xk / p
    bracket = (form.leading_sign * A
               - lps * exp_scaled_gamma0(lps * s2 / p)
               + lps * (1.0 + factor) * exp_scaled_gamma0(C))
    return (ea * lss * xk / (A * A)) * bracket


def _interference_survival(x, scn):
    # P(P_rx-free part): λ_ps e^{-λ_ss σ² x/p} / (λ_ps + λ_ss x)
    return scn.lambda_ps * np.exp(-scn.lambda_ss * scn.sigma2 * x / scn.p_peak) / (
        scn.lambda_ps + scn.lambda_ss * x)


def outage_raw(x, scn: Scenario, series: TruncatedSeries | None = None,
               regime: str = GENERAL, form: OutageForm = DERIVED):
    """Unclamped outage value for any ``form``; no range checks."""
    s = _series(scn, series)
    x = _positive(np.atleast_1d(x))
    if form == DERIVED:
        terms = _series_terms(x, scn, s, regime)
    else:
        terms = _literal_terms(x, scn, s, regime, form)
    total = form.sum_sign * (terms @ _weights(s, form))
    if regime == GENERAL:
        return 1.0 - _interference_survival(x, scn) + total
    if regime == HIGH_POWER:
        return total
    raise DomainError(f"unknown regime {regime!r}")


def _checked(raw, x):
    bad = (raw < -RANGE_SLACK) | (raw > 1.0 + RANGE_SLACK) | ~np.isfinite(raw)
    if bad.any():
        i = int(np.argmax(bad))
        raise ConditioningError(f"outage {raw[i]!r} outside [0, 1] at x={x[i]!r}")
    return np.clip(raw, 0.0, 1.0)


def outage_general(x, scn: Scenario, series: TruncatedSeries | None = None):
    """SU outage P(γ_s <= x) under peak-power adaptation."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = _checked(outage_raw(xa, scn, series, GENERAL), xa)
    return out[0] if np.ndim(x) == 0 else out


def outage_high_power(x, scn: Scenario, series: TruncatedSeries | None = None):
    """SU outage with P_tx = ψ/g_sp (peak constraint never active)."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = _checked(outage_raw(xa, scn, series, HIGH_POWER), xa)
    return out[0] if np.ndim(x) == 0 else out


@dataclass(frozen=True, eq=False)
class OutageCurve:
    x_grid: np.ndarray
    values: np.ndarray
    regime: str
    scenario: Scenario


def outage_curve(x_grid, scn: Scenario, regime: str = GENERAL,
                 series: TruncatedSeries | None = None) -> OutageCurve:
    x_grid = np.asarray(x_grid, dtype=float)
    fn = outage_general if regime == GENERAL else outage_high_power
    return OutageCurve(x_grid, np.asarray(fn(x_grid, scn, series)), regime, scn)


# ----------------------------------------------------------------- capacity

@dataclass(frozen=True)
class CapacityResult:
    mean_capacity: float  # (nats/s)/Hz
    closed_form_term: float
    i4_value: float
    quad_abs_err: float
    regime: str


def _gamma0_slope(a, b):
    """(h(b) − h(a))/(b − a), with a midpoint Taylor form when a ≈ b."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.empty(a.shape)
    delta = b - a
    close = np.abs(delta) < 1e-3 * np.minimum(a, b)
    if close.any():
        m = 0.5 * (a[close] + b[close])
        hm = exp_scaled_gamma0(m)
        d1 = hm - 1.0 / m
        d2 = d1 + 1.0 / m**2
        d3 = d2 - 2.0 / m**3
        d5 = d3 + 6.0 / m**4 - 24.0 / m**5  # h'''' then h'''''
        out[close] = d1 + d3 * delta[close] ** 2 / 24.0 + d5 * delta[close] ** 4 / 1920.0
    far = ~close
    if far.any():
        out[far] = (exp_scaled_gamma0(b[far]) - exp_scaled_gamma0(a[far])) / delta[far]
    return _finish(out)


def capacity_given_power(q, scn: Scenario):
    """E[ln(1 + q·g_ss/(p·g_ps + σ²))] for a fixed SU transmit power q."""
    q = _positive(q, "q")
    a = scn.lambda_ps * scn.sigma2 / scn.p_peak
    b = scn.lambda_ss * scn.sigma2 / q
    return _finish(np.asarray(-a * _gamma0_slope(a, b)))


def survival_given_power(x, q, scn: Scenario):
    """P(γ_s > x | P_tx = q)."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    return (np.exp(-scn.lambda_ss * scn.sigma2 * x / q)
            * scn.lambda_ps * q / (scn.lambda_ps * q + scn.lambda_ss * scn.p_peak * x))


def mean_capacity(scn: Scenario, regime: str = GENERAL,
                  quad_tol: float = DEFAULT_QUAD_TOL,
                  series: TruncatedSeries | None = None) -> CapacityResult:
    """E[ln(1 + γ_s)] = ∫₀^∞ (1 − F_γs(x))/(1 + x) dx with B = 1 Hz."""
    if not (0 < quad_tol <= 1e-4):
        raise DomainError(f"quad_tol must lie in (0, 1e-4], got {quad_tol!r}")
    s = _series(scn, series)
    w = s.weights
    if regime == GENERAL:
        closed = float(capacity_given_power(scn.p_peak, scn))

        def integrand(x):
            return -(_series_terms(x, scn, s, GENERAL) @ w) / (1.0 + x)
    elif regime == HIGH_POWER:
        closed = 0.0

        def integrand(x):
            # Survival of the truncated mixture; the dropped tail would add a
            # non-integrable constant.
            return ((1.0 - _series_terms(x, scn, s, HIGH_POWER)) @ w) / (1.0 + x)
    else:
        raise DomainError(f"unknown regime {regime!r}")
    res = integrate_semi_infinite(integrand, abs_tol=quad_tol)
    return CapacityResult(closed + res.value, closed, res.value, res.abs_err, regime)


def _fixed_t_pdf(q, psi, scn):
    c = scn.lambda_sp * psi
    return c * np.exp(-c / q) / (q * q)


def _capacity_over_ptx(scn, t_pdf, atom_mass, quad_tol):
    res = integrate(lambda q: capacity_given_power(q, scn) * t_pdf(q),
                    0.0, scn.p_peak, abs_tol=quad_tol)
    atom = atom_mass * float(capacity_given_power(scn.p_peak, scn))
    return CapacityResult(res.value + atom, atom, res.value, res.abs_err, "power_conditioned")


def capacity_fixed_it(psi_fixed: float, scn: Scenario,
                      quad_tol: float = DEFAULT_QUAD_TOL) -> CapacityResult:
    """Mean SU capacity when the threshold is pinned at ``psi_fixed``:
    P_tx = min(psi_fixed/g_sp, p)."""
    if not psi_fixed > 0:
        raise DomainError("psi_fixed must be > 0")
    atom = -np.expm1(-scn.lambda_sp * psi_fixed / scn.p_peak)
    res = _capacity_over_ptx(scn, lambda q: _fixed_t_pdf(q, psi_fixed, scn), atom, quad_tol)
    return CapacityResult(res.mean_capacity, res.closed_form_term, res.i4_value,
                          res.quad_abs_err, "fixed_it")


def capacity_by_conditioning(scn: Scenario, quad_tol: float = DEFAULT_QUAD_TOL,
                             series: TruncatedSeries | None = None) -> CapacityResult:
    """Dynamic-threshold capacity by integrating the fixed-power capacity
    against the P_tx law; shares nothing with the outage series."""
    s = _series(scn, series)
    atom = float(np.sum(s.weights) - cdf_t(scn.p_peak, scn, s))
    return _capacity_over_ptx(scn, lambda q: pdf_t(q, scn, s), atom, quad_tol)


def _outage_over_ptx(x, scn, t_pdf, atom_mass, quad_tol):
    x = _positive(np.atleast_1d(x))
    out = np.empty(x.shape)
    for i, xi in enumerate(x):
        res = integrate(lambda q: survival_given_power(xi, q, scn) * t_pdf(q),
                        0.0, scn.p_peak, abs_tol=quad_tol)
        out[i] = 1.0 - res.value - atom_mass * survival_given_power(xi, scn.p_peak, scn)
    return out


def outage_fixed_it(x, psi_fixed: float, scn: Scenario, quad_tol: float = 1e-10):
    """P(γ_s <= x) with the threshold pinned at ``psi_fixed``."""
    if not psi_fixed > 0:
        raise DomainError("psi_fixed must be > 0")
    atom = -np.expm1(-scn.lambda_sp * psi_fixed / scn.p_peak)
    out = _outage_over_ptx(x, scn, lambda q: _fixed_t_pdf(q, psi_fixed, scn), atom, quad_tol)
    out = np.clip(out, 0.0, 1.0)
    return out[0] if np.ndim(x) == 0 else out


def outage_by_conditioning(x, scn: Scenario, series: TruncatedSeries | None = None,
                           quad_tol: float = 1e-11):
    """General-regime outage through the P_tx law (independent route)."""
    s = _series(scn, series)
    atom = float(np.sum(s.weights) - cdf_t(scn.p_peak, scn, s))
    out = _outage_over_ptx(x, scn, lambda q: pdf_t(q, scn, s), atom, quad_tol)
    return out[0] if np.ndim(x) == 0 else out
