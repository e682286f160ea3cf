import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lpdist.errors import ConvergenceError, DomainError
from lpdist.specfun import (
    PIndex,
    abs_moment,
    as_pindex,
    log_beta,
    log_gamma,
    mp_ratio,
    norm_const,
    reg_inc_beta,
    stirling_remainder,
)

mp.mp.dps = 40


def test_pindex_parsing():
    assert as_pindex("inf").is_infinite
    assert as_pindex(math.inf) is PIndex.INF
    assert as_pindex("2.5").finite == 2.5
    assert as_pindex(3).inv == pytest.approx(1 / 3)
    assert PIndex.INF.inv == 0.0
    assert str(PIndex.INF) == "inf" and str(as_pindex(2)) == "2"
    for bad in (0.5, -1, "abc", math.nan):
        with pytest.raises(DomainError):
            as_pindex(bad)
    with pytest.raises(DomainError):
        PIndex.INF.finite


@pytest.mark.parametrize("x", [1e-8, 0.3, 1.0, 2.5, 14.99, 15.0, 171.5, 1e5, 1e12])
def test_log_gamma_and_remainder_match_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-14, abs=1e-14)
    ref = mp.loggamma(x) - ((x - mp.mpf(0.5)) * mp.log(x) - x + mp.log(2 * mp.pi) / 2)
    assert stirling_remainder(x) == pytest.approx(float(ref), rel=1e-9, abs=1e-15)


def test_log_gamma_domain():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            log_gamma(bad)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1, 1), (3.5, 0.5), (499.5, 0.5), (1e6, 2.0), (1e7, 1e7)])
def test_log_beta_matches_mpmath(a, b):
    ref = float(mp.log(mp.beta(a, b)))
    assert log_beta(a, b) == pytest.approx(ref, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, 0.5), (4.5, 0.5), (49.5, 0.5), (2.0, 7.0), (300.0, 40.0)])
def test_reg_inc_beta_matches_mpmath(a, b):
    xs = np.array([1e-9, 0.01, 0.2, 0.5, 0.77, 0.95, 0.999999])
    got = reg_inc_beta(a, b, xs)
    ref = [float(mp.betainc(a, b, 0, x, regularized=True)) for x in xs]
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-14)


def test_reg_inc_beta_endpoints_and_errors():
    assert reg_inc_beta(2.0, 3.0, 0.0) == 0.0
    assert reg_inc_beta(2.0, 3.0, 1.0) == 1.0
    assert isinstance(reg_inc_beta(2.0, 3.0, 0.4), float)
    with pytest.raises(DomainError):
        reg_inc_beta(2.0, 3.0, 1.5)
    with pytest.raises(DomainError):
        reg_inc_beta(0.0, 3.0, 0.5)
    with pytest.raises(ConvergenceError):
        reg_inc_beta(2.0, 3.0, 0.4, max_iter=1)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.2, 200.0),
    b=st.floats(0.2, 200.0),
    k=st.integers(0, 2**30),
)
def test_reg_inc_beta_reflection(a, b, k):
    x = k / 2**30  # dyadic, so 1 - x is exact
    assert reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.0, 40.0])
def test_norm_const_integrates_density(p):
    val, _ = integrate.quad(lambda x: math.exp(-abs(x) ** p / p), -math.inf, math.inf, epsabs=1e-14)
    assert norm_const(p) == pytest.approx(val, rel=1e-10)


def test_norm_const_special_cases():
    assert norm_const(2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)
    assert norm_const(1) == pytest.approx(2.0, rel=1e-15)
    assert norm_const("inf") == 2.0


@pytest.mark.parametrize("p", [1.0, 1.7, 2.0, 3.0, 4.0, 11.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
def test_abs_moment_by_direct_integration(p, alpha):
    c = norm_const(p)
    val, _ = integrate.quad(
        lambda x: 2 * x**alpha * math.exp(-(x**p) / p) / c, 0, math.inf, epsabs=1e-14, limit=200
    )
    assert abs_moment(p, alpha) == pytest.approx(val, rel=1e-9)
    assert abs_moment(p, alpha) == pytest.approx(p ** (alpha / p) * mp_ratio(p, alpha), rel=1e-14)


def test_abs_moment_closed_forms():
    assert abs_moment(2, 2) == pytest.approx(1.0, rel=1e-15)
    assert abs_moment(2, 4) == pytest.approx(3.0, rel=1e-14)
    assert abs_moment(1, 2) == pytest.approx(2.0, rel=1e-14)
    assert abs_moment("inf", 2) == pytest.approx(1 / 3)
    assert abs_moment("inf", 4) == pytest.approx(1 / 5)
    # the bare ratio is not a moment: at p = 2 it gives 1/2 for the variance
    assert mp_ratio(2, 2) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(DomainError):
        mp_ratio("inf", 2)
    with pytest.raises(DomainError):
        abs_moment(2, -1)


@settings(max_examples=50, deadline=None)
@given(p=st.floats(1.0, 60.0))
def test_moment_identities(p):
    m2 = abs_moment(p, 2)
    assert abs_moment(p, p) == pytest.approx(1.0, rel=1e-12)
    assert abs_moment(p, 2 * p) - 1.0 == pytest.approx(p, rel=1e-10)
    assert abs_moment(p, p + 2) == pytest.approx(3 * m2, rel=1e-12)
