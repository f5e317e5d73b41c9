"""Pricing tests.

The family formulas are checked against three independent oracles:
  * the Bachelier / Black-Scholes closed forms (gaussian base density),
  * exact algebra for the logistic linear family, whose law is
    Uniform[s - Y, s + Y] (the log-slope of the logistic is affine in the
    cdf, so the transformed variable is uniform),
  * payoff quadrature against the base density for the geometric family
    (X = s f(Z + y)/f(Z) with Z ~ F), frozen below from scipy.integrate.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from zonoid_lab.densities import DensityModel
from zonoid_lab.errors import DomainError, ValidationError
from zonoid_lab.pricing import (ModelParams, bachelier_call, bachelier_curve,
                                black_scholes_call, black_scholes_curve,
                                family_call_geometric,
                                family_call_geometric_with_flag,
                                family_call_linear, family_call_linear_with_flag,
                                geometric_family_curve, linear_family_curve,
                                survival, survival_geometric, survival_linear)

GAUSS = DensityModel.gaussian()
LOGISTIC = DensityModel.logistic()

# frozen from scipy.integrate.quad of (s f(z+y)/f(z) - K)^+ f(z) dz,
# logistic base, s = 1, y = 0.7
GEO_LOGISTIC_ORACLE = {
    0.6: 0.40970811843004107,
    1.0: 0.17323515724932292,
    1.5: 0.03724902786721527,
}


def test_model_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(0.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        ModelParams(0.0, -1.0, 1.0)
    with pytest.raises(ValidationError):
        ModelParams(0.0, 1.0, -0.5)
    with pytest.raises(ValidationError):
        ModelParams(np.inf, 1.0, 1.0)


# ---------------------------------------------------------------------------
# Benchmark closed forms
# ---------------------------------------------------------------------------

def test_bachelier_frozen_values():
    # frozen from scipy.stats.norm
    assert bachelier_call(ModelParams(0.0, 1.0, 1.0), 0.0) == pytest.approx(
        0.3989422804014327, abs=1e-15)
    assert bachelier_call(ModelParams(0.3, 0.7, 2.0), 1.0) == pytest.approx(
        0.13974885986197205, abs=1e-15)


def test_black_scholes_frozen_values():
    assert black_scholes_call(ModelParams(1.0, 1.0, 1.0), 1.0) == pytest.approx(
        0.38292492254802624, abs=1e-15)
    # homothety: prices scale linearly in s0 at fixed moneyness
    assert black_scholes_call(ModelParams(2.0, 1.0, 1.0), 2.0) == pytest.approx(
        0.7658498450960525, abs=1e-15)


def test_time_zero_prices_are_intrinsic():
    p = ModelParams(1.5, 1.0, 0.0)
    assert bachelier_call(p, 1.0) == 0.5
    assert bachelier_call(p, 2.0) == 0.0
    assert black_scholes_call(p, 1.0) == 0.5
    assert black_scholes_call(p, 2.0) == 0.0


def test_black_scholes_limits():
    # huge maturity: the call tends to s0 (K fixed)
    assert black_scholes_call(ModelParams(1.0, 1.0, 4000.0), 1.0) == pytest.approx(
        1.0, abs=1e-6)
    with pytest.raises(DomainError):
        black_scholes_call(ModelParams(1.0, 1.0, 1.0), -1.0)
    with pytest.raises(DomainError):
        black_scholes_call(ModelParams(-1.0, 1.0, 1.0), 1.0)


def test_bachelier_is_symmetric_around_s0():
    p = ModelParams(0.4, 1.3, 2.0)
    for d in (0.3, 1.0, 2.5):
        call = bachelier_call(p, 0.4 + d)
        put_parity = bachelier_call(p, 0.4 - d) - d  # C(s0-d) - E[X - (s0-d)]
        assert call == pytest.approx(put_parity, abs=1e-14)


# ---------------------------------------------------------------------------
# Family closed forms vs the benchmarks (gaussian base)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s0,sigma,t", [(0.0, 1.0, 1.0), (0.3, 0.7, 2.0),
                                        (-1.0, 2.0, 0.25)])
def test_linear_family_reduces_to_bachelier(s0, sigma, t):
    params = ModelParams(s0, sigma, t)
    y = sigma * math.sqrt(t)
    ks = s0 + np.linspace(-4.0, 4.0, 17) * y
    want = np.array([bachelier_call(params, k) for k in ks])
    got = family_call_linear(GAUSS, s0, y, ks)
    assert np.max(np.abs(got - want)) <= 1e-10


@pytest.mark.parametrize("s0,sigma,t", [(1.0, 1.0, 1.0), (1.2, 0.5, 4.0),
                                        (0.5, 2.0, 0.25)])
def test_geometric_family_reduces_to_black_scholes(s0, sigma, t):
    params = ModelParams(s0, sigma, t)
    y = sigma * math.sqrt(t)
    ks = s0 * np.exp(np.linspace(-3.0, 3.0, 17) * y)
    want = np.array([black_scholes_call(params, k) for k in ks])
    got = family_call_geometric(GAUSS, s0, y, ks)
    assert np.max(np.abs(got - want)) <= 1e-10
    surv_want = norm.cdf(np.log(s0 / ks) / y - 0.5 * y)
    surv_got = survival_geometric(GAUSS, s0, y, ks)
    assert np.max(np.abs(surv_got - surv_want)) <= 1e-12


def test_linear_survival_matches_bachelier_delta():
    s0, y = 0.3, 0.9
    ks = np.linspace(-2.0, 3.0, 21)
    want = norm.cdf((s0 - ks) / y)
    got = survival_linear(GAUSS, s0, y, ks)
    assert np.max(np.abs(got - want)) <= 1e-12


# ---------------------------------------------------------------------------
# Family closed forms vs the independent oracles (logistic base)
# ---------------------------------------------------------------------------

def test_linear_logistic_is_uniform_exactly():
    # logistic log-slope maps to Uniform[s-Y, s+Y]; call is a clipped parabola
    s, yval = 0.4, 1.5
    for k in (-0.6, 0.4, 1.1):
        want = (s + yval - k) ** 2 / (4.0 * yval)
        assert family_call_linear(LOGISTIC, s, yval, k) == pytest.approx(
            want, abs=1e-14)
    # survival is the uniform tail
    assert survival_linear(LOGISTIC, s, yval, 0.4) == pytest.approx(0.5, abs=1e-14)
    assert survival_linear(LOGISTIC, s, yval, 1.15) == pytest.approx(0.25, abs=1e-14)


def test_linear_logistic_unit_case():
    # s=0, Y=1, scale=1: C(K) = (1-K)^2/4 on [-1, 1]
    for k in (-1.0, -0.2, 0.0, 0.5, 1.0):
        assert family_call_linear(LOGISTIC, 0.0, 1.0, k) == pytest.approx(
            (1.0 - k) ** 2 / 4.0, abs=1e-14)


def test_geometric_logistic_matches_quadrature_oracle():
    for k, want in GEO_LOGISTIC_ORACLE.items():
        got = family_call_geometric(LOGISTIC, 1.0, 0.7, k)
        assert got == pytest.approx(want, abs=1e-9)


def test_geometric_family_is_homogeneous_in_s():
    # C(s, K) = s * C(1, K/s)
    for s in (0.5, 2.0):
        for k, base in GEO_LOGISTIC_ORACLE.items():
            got = family_call_geometric(LOGISTIC, s, 0.7, s * k)
            assert got == pytest.approx(s * base, abs=1e-9 * max(1.0, s))


def test_clamp_flags_and_values():
    # outside the reachable strike band the price is pinned and flagged
    lo, hi = LOGISTIC.log_slope_range()
    s, yval = 0.0, 1.0
    k_low, k_high = s + yval * lo - 0.5, s + yval * hi + 0.5
    val, flag = family_call_linear_with_flag(LOGISTIC, s, yval, k_low)
    assert flag and val == pytest.approx(s - k_low, abs=1e-14)
    val, flag = family_call_linear_with_flag(LOGISTIC, s, yval, k_high)
    assert flag and val == 0.0
    val, flag = family_call_linear_with_flag(LOGISTIC, s, yval, 0.0)
    assert not flag
    r_lo, r_hi = LOGISTIC.ratio_range(0.7)
    val, flag = family_call_geometric_with_flag(LOGISTIC, 1.0, 0.7, r_lo * 0.5)
    assert flag and val == pytest.approx(1.0 - r_lo * 0.5, abs=1e-14)
    val, flag = family_call_geometric_with_flag(LOGISTIC, 1.0, 0.7, r_hi * 2.0)
    assert flag and val == 0.0


def test_family_argument_validation():
    with pytest.raises(DomainError):
        family_call_linear(GAUSS, 0.0, -1.0, 0.0)
    with pytest.raises(DomainError):
        family_call_geometric(GAUSS, -1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        family_call_geometric(GAUSS, 1.0, 1.0, -1.0)
    with pytest.raises(ValidationError):
        survival("cubic", GAUSS, 0.0, 1.0, 0.0)


def test_survival_dispatcher_matches_direct_calls():
    assert survival("linear", GAUSS, 0.1, 0.8, 0.5) == survival_linear(
        GAUSS, 0.1, 0.8, 0.5)
    assert survival("geometric", GAUSS, 1.0, 0.8, 1.3) == survival_geometric(
        GAUSS, 1.0, 0.8, 1.3)


# ---------------------------------------------------------------------------
# Structural properties
# ---------------------------------------------------------------------------

def test_survival_is_minus_call_slope():
    # Breeden-Litzenberger first derivative: C'(K) = -P(X > K)
    s0, yval = 0.2, 1.1
    h = 1e-5
    for model in (GAUSS, LOGISTIC):
        for k in (-0.8, 0.2, 0.9):
            fd = (family_call_linear(model, s0, yval, k + h)
                  - family_call_linear(model, s0, yval, k - h)) / (2.0 * h)
            assert -fd == pytest.approx(survival_linear(model, s0, yval, k),
                                        abs=1e-8)
    for k in (0.7, 1.0, 1.6):
        fd = (family_call_geometric(GAUSS, 1.0, 0.9, k + h)
              - family_call_geometric(GAUSS, 1.0, 0.9, k - h)) / (2.0 * h)
        assert -fd == pytest.approx(survival_geometric(GAUSS, 1.0, 0.9, k),
                                    abs=1e-8)


def test_breeden_litzenberger_density_recovery():
    # second strike derivative of the linear-family curve is the gaussian
    # density with scale Y
    s0, yval = 0.1, 0.8
    h = 1e-4 * yval
    for k in (-0.7, 0.1, 0.9):
        f2 = (family_call_linear(GAUSS, s0, yval, k + h)
              - 2.0 * family_call_linear(GAUSS, s0, yval, k)
              + family_call_linear(GAUSS, s0, yval, k - h)) / h ** 2
        want = norm.pdf((k - s0) / yval) / yval
        assert f2 == pytest.approx(want, abs=1e-6)


def test_curve_constructors_have_consistent_domains():
    c1 = bachelier_curve(ModelParams(0.0, 1.0, 1.0))
    c1.validate()
    c2 = black_scholes_curve(ModelParams(1.0, 1.0, 1.0))
    c2.validate()
    assert c2.positive and not c1.positive
    c3 = linear_family_curve(LOGISTIC, 0.0, 1.0)
    c3.validate()
    # uniform support, shaved by the 1e-9 quantile clip
    assert c3.k_lo == pytest.approx(-1.0, abs=1e-8)
    assert c3.k_hi == pytest.approx(1.0, abs=1e-8)
    c4 = geometric_family_curve(LOGISTIC, 1.0, 0.7)
    c4.validate()
    assert c4.positive
    assert c4.k_lo >= math.exp(-0.7) - 1e-12 and c4.k_hi <= math.exp(0.7) + 1e-12


def test_curves_match_underlying_formulas():
    params = ModelParams(0.3, 0.7, 2.0)
    curve = bachelier_curve(params)
    ks = np.linspace(curve.k_lo, curve.k_hi, 33)
    want = np.array([bachelier_call(params, k) for k in ks])
    assert np.max(np.abs(curve(ks) - want)) == 0.0
    fam = geometric_family_curve(GAUSS, 1.0, 0.7)
    ks = np.geomspace(fam.k_lo, fam.k_hi, 33)
    want = family_call_geometric(GAUSS, 1.0, 0.7, ks)
    assert np.max(np.abs(fam(ks) - want)) == 0.0


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(s0=st.floats(-2, 2), yval=st.floats(0.1, 3),
       k=st.floats(-6, 6),
       family=st.sampled_from(["gaussian", "logistic"]))
def test_linear_family_price_bounds_property(s0, yval, k, family):
    model = DensityModel(family)
    val = family_call_linear(model, s0, yval, k)
    assert max(s0 - k, 0.0) - 1e-12 <= val <= max(s0 - k, 0.0) + yval


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.1, 3), y=st.floats(0.1, 3), k=st.floats(0.05, 8),
       family=st.sampled_from(["gaussian", "logistic"]))
def test_geometric_family_price_bounds_property(s, y, k, family):
    model = DensityModel(family)
    val = family_call_geometric(model, s, y, k)
    assert max(s - k, 0.0) - 1e-12 <= val <= s + 1e-12


@settings(max_examples=40, deadline=None)
@given(s0=st.floats(-2, 2), yval=st.floats(0.1, 3),
       k1=st.floats(-5, 5), k2=st.floats(-5, 5))
def test_linear_family_monotone_in_strike_property(s0, yval, k1, k2):
    lo, hi = min(k1, k2), max(k1, k2)
    assert family_call_linear(GAUSS, s0, yval, lo) >= family_call_linear(
        GAUSS, s0, yval, hi) - 1e-12