"""Call-curve / zonoid-boundary duality tests.

Three independent routes are cross-checked throughout: the conjugate
transform, the quantile-integral route, and the exact greedy rule for
finite-atom distributions.  Hand-derived piecewise-linear cases (two-point
and uniform two-atom laws) pin exact values.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from zonoid_lab.densities import DensityModel
from zonoid_lab.errors import DomainError, UnsupportedError, ValidationError
from zonoid_lab.pricing import (ModelParams, bachelier_curve,
                                black_scholes_curve, linear_family_curve)
from zonoid_lab.zonoid import (CallCurve, DiscreteDistribution, ZonoidBoundary,
                               boundary_from_quantile_integral,
                               calls_from_upper_boundary,
                               check_arithmetic_symmetry, check_convex_order,
                               check_geometric_symmetry,
                               discrete_upper_boundary,
                               inverse_boundary_positive,
                               project_convex_decreasing,
                               upper_boundary_from_calls)

COIN = DiscreteDistribution([0.0, 1.0], [0.5, 0.5])
TWO_ATOM = DiscreteDistribution([1.0, 3.0], [0.5, 0.5])


def legendre_min_oracle(call_values, kgrid, p):
    """Brute-force conjugate min_K [C(K) + pK] over a dense strike grid."""
    return np.min(call_values[None, :] + np.atleast_1d(p)[:, None] * kgrid[None, :],
                  axis=1)


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------

def test_call_curve_infers_mean_from_deep_itm_node():
    ks = np.linspace(-10.0, 10.0, 201)
    curve = CallCurve.from_grid(ks, np.maximum(0.5 - ks, 0.0))
    assert curve.mean == pytest.approx(0.5, abs=1e-12)


def test_call_curve_asymptotes_outside_domain():
    curve = bachelier_curve(ModelParams(0.0, 1.0, 1.0))
    grid = upper_boundary_from_calls(curve)  # smoke: default grid works
    assert grid.mean == 0.0
    assert curve(curve.k_lo - 5.0) == pytest.approx(0.0 - (curve.k_lo - 5.0), abs=1e-9)
    assert curve(curve.k_hi + 5.0) == 0.0


def test_call_curve_validate_rejects_garbage():
    ks = np.linspace(-2.0, 2.0, 9)
    increasing = np.linspace(0.0, 1.0, 9)
    with pytest.raises(ValidationError):
        CallCurve.from_grid(ks, increasing, mean=0.0).validate()
    concave = 1.0 - (ks / 2.0) ** 2
    with pytest.raises(ValidationError):
        CallCurve.from_grid(ks, concave, mean=0.0).validate()


def test_boundary_endpoints_and_lower_branch():
    b = COIN.boundary_curve()
    assert b(0.0) == 0.0
    assert b(1.0) == pytest.approx(0.5, abs=1e-15)
    # lower boundary by the point-symmetry of the zonoid
    assert b.lower(0.25) == pytest.approx(0.5 - b(0.75), abs=1e-15)
    with pytest.raises(DomainError):
        b(1.2)
    with pytest.raises(DomainError):
        b(-0.1)


def test_boundary_validate_rejects_convex_shape():
    ps = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValidationError):
        ZonoidBoundary.from_grid(ps, ps ** 2, mean=1.0).validate()


# ---------------------------------------------------------------------------
# Discrete distributions: hand values
# ---------------------------------------------------------------------------

def test_discrete_validation():
    with pytest.raises(ValidationError):
        DiscreteDistribution([1.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValidationError):
        DiscreteDistribution([1.0, 2.0], [0.7, 0.5])
    with pytest.raises(ValidationError):
        DiscreteDistribution([1.0, 2.0], [1.1, -0.1])


def test_coin_call_values_by_hand():
    # E(X-K)^+ for a fair coin on {0,1}
    assert COIN.call_value(-1.0) == pytest.approx(1.5, abs=1e-15)
    assert COIN.call_value(0.0) == pytest.approx(0.5, abs=1e-15)
    assert COIN.call_value(0.5) == pytest.approx(0.25, abs=1e-15)
    assert COIN.call_value(1.0) == 0.0


def test_coin_boundary_by_hand():
    # greedy rule: boundary(p) = min(p, 1/2) for the fair coin on {0,1}
    ps = np.linspace(0.0, 1.0, 21)
    got = discrete_upper_boundary(COIN, ps)
    assert np.max(np.abs(got - np.minimum(ps, 0.5))) == 0.0


def test_two_atom_boundary_by_hand():
    # atoms {1,3} equal weights: 3p up to 1/2, then 1 + p
    ps = np.linspace(0.0, 1.0, 41)
    want = np.where(ps <= 0.5, 3.0 * ps, 1.0 + ps)
    got = discrete_upper_boundary(TWO_ATOM, ps)
    assert np.max(np.abs(got - want)) <= 1e-15


def test_discrete_boundary_rejects_bad_p():
    with pytest.raises(DomainError):
        discrete_upper_boundary(COIN, 1.5)
    with pytest.raises(DomainError):
        discrete_upper_boundary(COIN, np.array([0.2, -0.2]))


# ---------------------------------------------------------------------------
# Transform cross-checks
# ---------------------------------------------------------------------------

def test_conjugate_matches_greedy_on_kink_grid():
    dist = DiscreteDistribution([-1.0, 0.5, 2.0, 4.0], [0.1, 0.4, 0.3, 0.2])
    curve = dist.call_curve()
    ps = np.linspace(0.0, 1.0, 101)
    via_transform = upper_boundary_from_calls(curve, ps).values
    via_greedy = discrete_upper_boundary(dist, ps)
    assert np.max(np.abs(via_transform - via_greedy)) <= 1e-12


def test_quantile_integral_matches_greedy():
    dist = DiscreteDistribution([-2.0, 0.0, 1.0], [0.25, 0.5, 0.25])
    ps = np.linspace(0.0, 1.0, 101)
    a = boundary_from_quantile_integral(dist, ps)
    b = discrete_upper_boundary(dist, ps)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_quantile_integral_matches_gaussian_closed_form():
    ps = np.linspace(0.05, 0.95, 19)
    got = boundary_from_quantile_integral(DensityModel.gaussian(), ps)
    want = norm.pdf(norm.ppf(ps))
    assert np.max(np.abs(got - want)) <= 1e-9


def test_quantile_integral_rejects_cauchy():
    with pytest.raises(DomainError):
        boundary_from_quantile_integral(DensityModel.cauchy(), 0.5)


def test_three_routes_agree_for_bachelier():
    # conjugate of the closed-form curve vs quantile integral vs exact formula
    t = 0.25
    curve = bachelier_curve(ModelParams(0.0, 1.0, t))
    ps = np.linspace(0.1, 0.9, 9)
    via_transform = upper_boundary_from_calls(curve, ps).values
    scaled = DensityModel.gaussian(scale=math.sqrt(t))
    via_integral = boundary_from_quantile_integral(scaled, ps)
    exact = math.sqrt(t) * norm.pdf(norm.ppf(ps))
    assert np.max(np.abs(via_transform - exact)) <= 1e-8
    assert np.max(np.abs(via_integral - exact)) <= 1e-9


def test_conjugate_pins_endpoints_exactly():
    curve = black_scholes_curve(ModelParams(1.0, 1.0, 1.0))
    b = upper_boundary_from_calls(curve, np.array([0.0, 0.5, 1.0]))
    assert b.values[0] == 0.0
    assert b.values[-1] == 1.0


def test_calls_from_boundary_recovers_pl_curve_exactly():
    dist = DiscreteDistribution([0.5, 2.0, 3.5], [0.3, 0.4, 0.3])
    boundary = dist.boundary_curve()
    ks = np.array([-1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 3.5, 4.0])
    got = calls_from_upper_boundary(boundary, ks).values
    want = dist.call_value(ks)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_round_trip_calls_to_boundary_to_calls():
    curve = bachelier_curve(ModelParams(0.2, 0.8, 1.5))
    pgrid = np.linspace(0.0, 1.0, 2001)
    boundary = upper_boundary_from_calls(curve, pgrid)
    kgrid = np.linspace(curve.k_lo, curve.k_hi, 2001)
    back = calls_from_upper_boundary(boundary, kgrid)
    assert np.max(np.abs(back.values - curve(kgrid))) <= 1e-4


def test_round_trip_boundary_to_calls_to_boundary():
    t = 1.0
    fn = lambda p: norm.cdf(norm.ppf(np.clip(p, 1e-300, 1.0)) + math.sqrt(t))
    boundary = ZonoidBoundary.from_function(fn, mean=1.0)
    kgrid = np.geomspace(1e-3, 60.0, 2001)
    curve = calls_from_upper_boundary(boundary, kgrid)
    pgrid = np.linspace(0.0, 1.0, 2001)
    back = upper_boundary_from_calls(curve, pgrid)
    want = np.concatenate(([0.0], fn(pgrid[1:-1]), [1.0]))
    assert np.max(np.abs(back.values - want)) <= 1e-4


def test_mean_is_preserved_by_both_transforms():
    curve = TWO_ATOM.call_curve()
    b = upper_boundary_from_calls(curve, np.linspace(0, 1, 11))
    assert b.mean == curve.mean
    back = calls_from_upper_boundary(b, np.linspace(-1, 5, 13))
    assert back.mean == curve.mean


# ---------------------------------------------------------------------------
# Inverse boundary (positive variables)
# ---------------------------------------------------------------------------

def test_inverse_boundary_matches_lognormal_closed_form():
    t = 1.0
    curve = black_scholes_curve(ModelParams(1.0, 1.0, t))
    for q in (0.05, 0.3, 0.6, 0.95):
        got = inverse_boundary_positive(curve, q)
        want = norm.cdf(norm.ppf(q) - math.sqrt(t))
        assert got == pytest.approx(want, abs=1e-7)


def test_inverse_boundary_grid_route():
    dist = DiscreteDistribution([0.5, 1.5], [0.5, 0.5])
    curve = dist.call_curve()
    # boundary(p) = 1.5 p up to 1/2, then 0.75 + 0.5 (p - 1/2)
    got = inverse_boundary_positive(curve, 0.6)
    assert got == pytest.approx(0.4, abs=1e-12)


def test_inverse_boundary_domain_errors():
    curve = black_scholes_curve(ModelParams(1.0, 1.0, 1.0))
    for q in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(DomainError):
            inverse_boundary_positive(curve, q)
    signed = bachelier_curve(ModelParams(0.0, 1.0, 1.0))
    with pytest.raises(UnsupportedError):
        inverse_boundary_positive(signed, 0.5)


# ---------------------------------------------------------------------------
# Order and symmetry checks
# ---------------------------------------------------------------------------

def test_convex_order_in_time():
    lo = bachelier_curve(ModelParams(0.0, 1.0, 0.5))
    hi = bachelier_curve(ModelParams(0.0, 1.0, 2.0))
    assert check_convex_order(lo, hi)
    assert not check_convex_order(hi, lo)
    shifted = bachelier_curve(ModelParams(1.0, 1.0, 2.0))
    with pytest.raises(DomainError):
        check_convex_order(lo, shifted)


def test_arithmetic_symmetry():
    assert check_arithmetic_symmetry(bachelier_curve(ModelParams(0.0, 1.0, 1.0)))
    dist = DiscreteDistribution([-1.0, 2.0], [2.0 / 3.0, 1.0 / 3.0])  # mean 0, skewed
    kgrid = np.linspace(-2.0, 2.0, 81)
    assert not check_arithmetic_symmetry(dist.call_curve(), kgrid)


def test_geometric_symmetry():
    assert check_geometric_symmetry(black_scholes_curve(ModelParams(1.0, 0.7, 1.0)))
    skewed = DiscreteDistribution([0.5, 1.5], [0.5, 0.5]).call_curve()
    kgrid = np.geomspace(0.25, 4.0, 41)
    assert not check_geometric_symmetry(skewed, kgrid)
    with pytest.raises(DomainError):
        check_geometric_symmetry(black_scholes_curve(ModelParams(2.0, 1.0, 1.0)))


def test_geometric_symmetry_identity_via_inverse_boundary():
    # for the lognormal family the inverse boundary satisfies
    # Chat^{-1}(q) = 1 - Chat(1 - q)
    t = 0.64
    curve = black_scholes_curve(ModelParams(1.0, 1.0, t))
    boundary = upper_boundary_from_calls(curve, np.linspace(0.0, 1.0, 2001))
    for q in (0.2, 0.5, 0.8):
        lhs = inverse_boundary_positive(curve, q)
        rhs = 1.0 - float(boundary(1.0 - q))
        assert lhs == pytest.approx(rhs, abs=1e-6)


# ---------------------------------------------------------------------------
# Convex projection
# ---------------------------------------------------------------------------

def test_projection_is_identity_on_cone_members():
    ks = np.linspace(-3.0, 3.0, 301)
    vals = bachelier_curve(ModelParams(0.0, 1.0, 1.0))(ks)
    out, dist = project_convex_decreasing(ks, vals)
    assert dist == 0.0
    assert np.array_equal(out, vals)


def test_projection_repairs_noise():
    rng = np.random.default_rng(0)
    ks = np.linspace(-3.0, 3.0, 201)
    clean = bachelier_curve(ModelParams(0.0, 1.0, 1.0))(ks)
    noisy = clean + rng.normal(0.0, 5e-3, ks.size)
    out, dist = project_convex_decreasing(ks, noisy)
    slopes = np.diff(out) / np.diff(ks)
    assert np.all(np.diff(slopes) >= -1e-12)
    assert np.all(slopes <= 1e-12) and np.all(slopes >= -1.0 - 1e-12)
    assert dist == pytest.approx(np.max(np.abs(noisy - out)), abs=0.0)
    assert dist <= 0.05


def test_projection_input_validation():
    with pytest.raises(ValidationError):
        project_convex_decreasing([0.0, 0.0, 1.0], [1.0, 0.5, 0.2])
    with pytest.raises(ValidationError):
        project_convex_decreasing([0.0, 1.0], [[1.0], [0.5]])


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

@st.composite
def discrete_dists(draw, max_atoms=8):
    n = draw(st.integers(2, max_atoms))
    # atoms on a 1e-3 lattice: keeps strike spacing well above float noise
    raw_atoms = draw(st.lists(st.integers(-10_000, 10_000), min_size=n,
                              max_size=n, unique=True))
    atoms = np.sort(np.asarray(raw_atoms, dtype=np.float64)) / 1e3
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    w = np.asarray(raw) / np.sum(raw)
    w = w / w.sum()
    return DiscreteDistribution(atoms, w)


@settings(max_examples=50, deadline=None)
@given(dist=discrete_dists())
def test_greedy_boundary_properties(dist):
    ps = np.linspace(0.0, 1.0, 101)
    vals = discrete_upper_boundary(dist, ps)
    assert vals[0] == 0.0
    assert vals[-1] == pytest.approx(dist.mean, abs=1e-12)
    # concavity: slopes are the descending atoms
    slopes = np.diff(vals) / np.diff(ps)
    assert np.all(np.diff(slopes) <= 1e-9)
    # dominated by the segment to the top atom at small p
    assert np.all(vals[1:-1] <= dist.atoms[-1] * ps[1:-1] + 1e-12)


@settings(max_examples=50, deadline=None)
@given(dist=discrete_dists())
def test_conjugate_equals_greedy_property(dist):
    curve = dist.call_curve()
    ps = np.linspace(0.0, 1.0, 101)
    via_transform = upper_boundary_from_calls(curve, ps).values
    via_greedy = discrete_upper_boundary(dist, ps)
    assert np.max(np.abs(via_transform - via_greedy)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(dist=discrete_dists(), q=st.floats(0.05, 0.95))
def test_inverse_boundary_inverts_forward_map_property(dist, q):
    positive = DiscreteDistribution(dist.atoms - dist.atoms[0] + 0.5, dist.weights)
    curve = positive.call_curve()
    target = float(q) * positive.mean
    p = inverse_boundary_positive(curve, target)
    forward = discrete_upper_boundary(positive, p)
    assert forward == pytest.approx(target, abs=1e-9 * max(1.0, positive.mean))
