import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dynit.distributions import (LAMBDA_P_FLOOR, AtomicMin, Scenario, build_series,
                                 db_to_linear, linear_to_db, poisson_pmf, psi_cdf,
                                 psi_mixture, psi_pdf, sinr_cdf, sinr_pmf, zt_poisson_pmf)
from dynit.errors import DomainError, SeriesTruncationError


def test_standard_defaults(scn):
    assert scn.p_peak == pytest.approx(10.0)
    assert 1 / scn.lambda_sp == pytest.approx(2.0)
    assert 1 / scn.lambda_ps == pytest.approx(3.3)
    assert 1 / scn.lambda_ss == pytest.approx(5.0)
    assert 1 / scn.lambda_pp == pytest.approx(4.0)
    assert scn.eta == pytest.approx(0.5)
    assert scn.with_(p_db=20).p_peak == pytest.approx(100.0)


@pytest.mark.parametrize("field", ["lambda_p", "lambda_ss", "sigma2", "p_peak"])
@pytest.mark.parametrize("value", [0.0, -1.0, math.inf, math.nan])
def test_scenario_rejects(field, value):
    with pytest.raises(DomainError):
        Scenario.standard(**{field: value})


def test_db_round_trip():
    x = np.array([-30.0, -10.0, 0.0, 3.0, 40.0])
    assert np.allclose(linear_to_db(db_to_linear(x)), x)


def test_zt_point_value():
    # 2²/(2!(e²−1))
    assert zt_poisson_pmf(2, 2.0) == pytest.approx(2 / math.expm1(2), rel=1e-15)
    assert abs(zt_poisson_pmf(2, 2.0) - 0.313) < 5e-4


@pytest.mark.parametrize("lam", [0.05, 0.5, 2.0, 6.0, 30.0])
def test_zt_matches_conditioned_poisson(lam):
    ks = np.arange(1, 40)
    ref = stats.poisson.pmf(ks, lam) / stats.poisson.sf(0, lam)
    got = np.array([zt_poisson_pmf(int(k), lam) for k in ks])
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-300)
    assert poisson_pmf(3, lam) == pytest.approx(stats.poisson.pmf(3, lam), rel=1e-12)


def test_zt_support():
    with pytest.raises(DomainError):
        zt_poisson_pmf(0, 2.0)
    with pytest.raises(DomainError):
        zt_poisson_pmf(1, 0.0)


def test_tiny_lambda_is_floored():
    assert zt_poisson_pmf(1, 1e-15) == pytest.approx(zt_poisson_pmf(1, LAMBDA_P_FLOOR))
    assert zt_poisson_pmf(1, LAMBDA_P_FLOOR) == pytest.approx(1.0, abs=1e-8)


@given(st.floats(min_value=0.01, max_value=50.0),
       st.sampled_from([1e-6, 1e-9, 1e-12, 1e-15]))
@settings(max_examples=60, deadline=None)
def test_series_tail_bound(lam, tol):
    s = build_series(lam, tol)
    assert s.tail < tol
    assert abs(1.0 - s.weights.sum() - s.tail) < 1e-13
    # K is the smallest such cut
    if s.K > 1:
        assert s.tail + s.weights[-1] >= tol


def test_series_known_length():
    assert build_series(2.0).K == 18


def test_series_weights_match_pmf():
    s = build_series(3.0)
    assert all(s.weights[k - 1] == zt_poisson_pmf(k, 3.0) for k in s.ks)


def test_series_cap():
    with pytest.raises(SeriesTruncationError):
        build_series(300.0, cap=50)
    with pytest.raises(DomainError):
        build_series(2.0, tail_tol=0.5)


def test_sinr_law(scn):
    s = build_series(scn)
    assert sinr_pmf(1, scn) == pytest.approx(s.weights[0])
    assert sinr_cdf(s.alphas[0] - 1e-9, s) == 0.0
    assert sinr_cdf(s.alphas[0], s) == pytest.approx(s.weights[0])
    assert sinr_cdf(1e12, s) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lam", [2.0, 4.0, 6.0])
def test_psi_mixture_consistency(lam):
    scn = Scenario.standard(lam)
    mix = psi_mixture(scn)
    x = np.linspace(0.01, 30, 300)
    # cdf' = pdf
    h = 1e-6
    num = (psi_cdf(x + h, mix) - psi_cdf(x - h, mix)) / (2 * h)
    assert np.allclose(num, psi_pdf(x, mix), rtol=1e-5)
    assert mix.mean() == pytest.approx(np.sum(mix.weights * scn.p_peak
                                              / (scn.lambda_pp * mix.series.alphas)))
    assert psi_cdf(0.0, mix) == 0.0
    assert psi_cdf(1e9, mix) == pytest.approx(1.0, abs=1e-12)


def test_psi_mean_closed_form(scn):
    # E[ψ] = E[g_pp]·p·E[1/γ_p]
    s = build_series(scn)
    expected = 4.0 * scn.p_peak * np.sum(s.weights / s.alphas)
    assert psi_mixture(scn).mean() == pytest.approx(expected, rel=1e-14)


def test_psi_domain():
    mix = psi_mixture(Scenario.standard())
    with pytest.raises(DomainError):
        psi_pdf(0.0, mix)
    with pytest.raises(DomainError):
        psi_cdf(-1.0, mix)


def test_atomic_min():
    law = AtomicMin(lambda v: 1 - np.exp(-np.asarray(v)), 2.0)
    assert law.atom_mass == pytest.approx(math.exp(-2))
    assert law.cdf(1.0) == pytest.approx(1 - math.exp(-1))
    assert law.cdf(2.0) == 1.0
