"""Call curves, zonoid upper boundaries, and the transforms linking them.

The two central objects are

* :class:`CallCurve`: K -> E(X - K)^+ for an integrable X, represented either
  by a closed-form callable on a stated strike domain or by values on a grid
  (piecewise linear, extended by its asymptotes outside the grid), and
* :class:`ZonoidBoundary`: the concave upper boundary p -> sup{ E[X g(X)] :
  0 <= g <= 1, E g(X) = p } of the lift zonoid of X.

They are conjugate to each other:

    boundary(p) = min_K [ call(K) + p K ]          (0 < p < 1)
    call(K)     = max_{0 <= p <= 1} [ boundary(p) - p K ]

with the exact endpoint values boundary(0) = 0 and boundary(1) = E(X).
``upper_boundary_from_calls`` and ``calls_from_upper_boundary`` implement the
two directions; ``boundary_from_quantile_integral`` is an independent route
through the integral of the upper quantile function, and
``discrete_upper_boundary`` solves the finite-atom problem exactly by the
threshold-rule construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .densities import DensityModel
from .errors import DomainError, UnsupportedError, ValidationError
from .numerics import as_float_array, golden_section_min

_P_EPS = 1e-9          # probability clipping for continuous searches
_Q_EPS = 1e-12         # quantile clipping for quadrature supports
_DEFAULT_GRID_N = 2001


def _value_scale(mean: float) -> float:
    return max(1.0, abs(mean))


# ---------------------------------------------------------------------------
# Curve objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CallCurve:
    """Non-increasing convex call curve of an integrable random variable.

    Exactly one of ``fn`` / (``strikes``, ``values``) is set.  Outside the
    grid a grid-backed curve follows its asymptotes: ``mean - K`` to the left
    and ``0`` to the right.  ``positive`` certifies that the underlying
    variable is almost surely positive (so C(K) = mean - K for K <= 0).
    """

    mean: float
    k_lo: float
    k_hi: float
    fn: Optional[Callable] = None
    strikes: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    positive: bool = False
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, fn, mean, domain, positive=False, provenance=None) -> "CallCurve":
        k_lo, k_hi = float(domain[0]), float(domain[1])
        if not (np.isfinite(k_lo) and np.isfinite(k_hi) and k_lo < k_hi):
            raise ValidationError("call curve domain must be a finite interval")
        return cls(float(mean), k_lo, k_hi, fn=fn, positive=bool(positive),
                   provenance=dict(provenance or {}))

    @classmethod
    def from_grid(cls, strikes, values, mean=None, positive=False, provenance=None) -> "CallCurve":
        strikes = as_float_array(strikes, "strikes")
        values = as_float_array(values, "values")
        if strikes.ndim != 1 or strikes.size < 2 or strikes.shape != values.shape:
            raise ValidationError("strike and value grids must be matching 1-d arrays")
        if np.any(np.diff(strikes) <= 0.0):
            raise ValidationError("strikes must be strictly increasing")
        if mean is None:
            # left-end asymptote C(K) ~ mean - K fixes the mean
            mean = float(values[0] + strikes[0])
        return cls(float(mean), float(strikes[0]), float(strikes[-1]),
                   strikes=strikes, values=values, positive=bool(positive),
                   provenance=dict(provenance or {}))

    @property
    def is_grid(self) -> bool:
        return self.fn is None

    def __call__(self, k):
        k = as_float_array(k, "strike")
        k_arr = np.atleast_1d(k)
        # outside [k_lo, k_hi] the curve sits on its asymptotes; the fn is
        # only trusted inside (it may not even accept outside strikes)
        if self.fn is not None:
            out = np.empty(k_arr.shape)
            inside = (k_arr >= self.k_lo) & (k_arr <= self.k_hi)
            if np.any(inside):
                out[inside] = np.asarray(self.fn(k_arr[inside]), dtype=np.float64)
        else:
            out = np.interp(k_arr, self.strikes, self.values)
        below = k_arr < self.k_lo
        above = k_arr > self.k_hi
        out[below] = self.mean - k_arr[below]
        out[above] = 0.0
        if np.ndim(k) == 0:
            return float(out[0])
        return out

    def sample_grid(self, n: int = 513) -> np.ndarray:
        if self.is_grid:
            return self.strikes
        return np.linspace(self.k_lo, self.k_hi, n)

    def validate(self, tail_tol: Optional[float] = None, shape_slack: float = 1e-9) -> None:
        """Raise ValidationError unless the curve is a plausible call curve:
        non-increasing, convex (to slack), and near its asymptotes at the
        domain endpoints."""
        ks = self.sample_grid()
        vals = np.atleast_1d(self.__call__(ks))
        if not np.all(np.isfinite(vals)):
            raise ValidationError("call curve values must be finite")
        vrange = float(vals.max() - vals.min())
        slack = shape_slack * max(vrange, 1e-300)
        if np.any(np.diff(vals) > slack):
            raise ValidationError("call curve must be non-increasing")
        if vals.size >= 3:
            # Slope monotonicity, not second differences: the grid may be
            # non-uniform (e.g. geometric).  Call-curve slopes lie in [-1, 0],
            # so an absolute slack on slope increments is scale-correct.
            slopes = np.diff(vals) / np.diff(ks)
            if float(np.min(np.diff(slopes))) < -shape_slack:
                raise ValidationError("call curve must be convex")
        if tail_tol is None:
            tail_tol = 1e-3 * _value_scale(self.mean)
        if abs(float(vals[-1])) > tail_tol:
            raise ValidationError(
                f"call curve does not decay at the right endpoint "
                f"(C({self.k_hi:g}) = {float(vals[-1]):.3g} > {tail_tol:.3g}); widen the grid")
        if abs(float(vals[0]) + ks[0] - self.mean) > tail_tol:
            raise ValidationError(
                f"call curve does not reach its intrinsic asymptote at the left "
                f"endpoint (C + K - m = {float(vals[0]) + ks[0] - self.mean:.3g})")


@dataclass(frozen=True, eq=False)
class ZonoidBoundary:
    """Concave upper boundary of a lift zonoid, pinned to (0,0) and (1,mean).

    The full zonoid region is recovered by symmetry: the lower boundary is
    p -> mean - boundary(1 - p), and the region is point-symmetric about
    (1/2, mean/2).
    """

    mean: float
    fn: Optional[Callable] = None
    probs: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, fn, mean, provenance=None) -> "ZonoidBoundary":
        return cls(float(mean), fn=fn, provenance=dict(provenance or {}))

    @classmethod
    def from_grid(cls, probs, values, mean=None, provenance=None) -> "ZonoidBoundary":
        probs = as_float_array(probs, "probs")
        values = as_float_array(values, "values")
        if probs.ndim != 1 or probs.size < 2 or probs.shape != values.shape:
            raise ValidationError("probability and value grids must be matching 1-d arrays")
        if np.any(np.diff(probs) <= 0.0):
            raise ValidationError("probability grid must be strictly increasing")
        if probs[0] < 0.0 or probs[-1] > 1.0:
            raise ValidationError("probability grid must lie in [0, 1]")
        if mean is None:
            if probs[-1] != 1.0:
                raise ValidationError("mean is required when the grid does not reach p = 1")
            mean = float(values[-1])
        return cls(float(mean), probs=probs, values=values,
                   provenance=dict(provenance or {}))

    @property
    def is_grid(self) -> bool:
        return self.fn is None

    def __call__(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise DomainError("boundary argument must lie in [0, 1]")
        if self.fn is not None:
            out = np.asarray(self.fn(p), dtype=np.float64)
            out = np.where(p == 0.0, 0.0, np.where(p == 1.0, self.mean, out))
        else:
            if np.any(p < self.probs[0]) or np.any(p > self.probs[-1]):
                raise DomainError("p outside the stored boundary grid")
            out = np.interp(p, self.probs, self.values)
        if np.ndim(p) == 0:
            return float(np.asarray(out).reshape(())[()])
        return out

    def lower(self, p):
        """Lower boundary branch mean - upper(1 - p)."""
        p_arr = np.asarray(p, dtype=np.float64)
        return self.mean - self.__call__(1.0 - p_arr)

    def sample_grid(self, n: int = 513) -> np.ndarray:
        if self.is_grid:
            return self.probs
        return np.linspace(0.0, 1.0, n)

    def validate(self, shape_slack: float = 1e-9) -> None:
        ps = self.sample_grid()
        vals = np.atleast_1d(self.__call__(ps))
        if not np.all(np.isfinite(vals)):
            raise ValidationError("boundary values must be finite")
        tol = 1e-12 * _value_scale(self.mean)
        if ps[0] == 0.0 and abs(float(vals[0])) > tol:
            raise ValidationError("boundary must start at (0, 0)")
        if ps[-1] == 1.0 and abs(float(vals[-1]) - self.mean) > tol:
            raise ValidationError("boundary must end at (1, mean)")
        if vals.size >= 3:
            # Slope monotonicity handles non-uniform grids (e.g. boundary
            # curves with kinks at atom weights).  Boundary slopes are
            # quantiles, so the slack scales with their magnitude.
            slopes = np.diff(vals) / np.diff(ps)
            slack = shape_slack * max(1.0, float(np.max(np.abs(slopes))))
            if float(np.max(np.diff(slopes))) > slack:
                raise ValidationError("boundary must be concave")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finite-support distribution with sorted atoms and positive weights."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = as_float_array(self.atoms, "atoms")
        weights = as_float_array(self.weights, "weights")
        if atoms.ndim != 1 or atoms.size == 0 or atoms.shape != weights.shape:
            raise ValidationError("atoms and weights must be matching 1-d arrays")
        if np.any(np.diff(atoms) <= 0.0):
            raise ValidationError("atoms must be sorted strictly increasing")
        if np.any(weights <= 0.0):
            raise ValidationError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def mean(self) -> float:
        return float(self.atoms @ self.weights)

    def call_value(self, k):
        """Exact E(X - K)^+ (piecewise linear in K with kinks at the atoms)."""
        k = as_float_array(k, "strike")
        payoff = np.clip(self.atoms[None, ...] - np.atleast_1d(k)[..., None], 0.0, None)
        out = payoff @ self.weights
        if np.ndim(k) == 0:
            return float(out[0])
        return out

    def call_curve(self, pad: Optional[float] = None) -> CallCurve:
        """Piecewise-linear call curve with kinks exactly at the atoms."""
        atoms = self.atoms
        if pad is None:
            spread = float(atoms[-1] - atoms[0])
            pad = max(1.0, 0.5 * spread)
        positive = bool(atoms[0] > 0.0)
        left = atoms[0] - pad
        if positive:
            left = max(0.0, left)
        strikes = np.concatenate(([left], atoms, [atoms[-1] + pad]))
        values = self.call_value(strikes)
        return CallCurve.from_grid(strikes, values, mean=self.mean, positive=positive,
                                   provenance={"kind": "discrete", "n_atoms": int(atoms.size)})

    def boundary_curve(self, pgrid=None) -> ZonoidBoundary:
        """Piecewise-linear upper boundary with kinks at the cumulative
        descending weights (plus any requested grid nodes)."""
        tails = np.cumsum(self.weights[::-1])
        kinks = np.concatenate(([0.0], tails))
        kinks[-1] = 1.0
        if pgrid is None:
            probs = kinks
        else:
            pgrid = as_float_array(pgrid, "pgrid")
            probs = np.unique(np.concatenate((kinks, pgrid)))
        vals = discrete_upper_boundary(self, probs)
        return ZonoidBoundary.from_grid(probs, vals, mean=self.mean,
                                        provenance={"kind": "discrete"})


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def _min_over_nodes(strikes, values, pgrid, chunk: int = 256) -> np.ndarray:
    out = np.empty(pgrid.size)
    for start in range(0, pgrid.size, chunk):
        p = pgrid[start:start + chunk, None]
        out[start:start + chunk] = np.min(values[None, :] + p * strikes[None, :], axis=1)
    return out


def _max_over_nodes(probs, bvals, kgrid, chunk: int = 256) -> np.ndarray:
    out = np.empty(kgrid.size)
    for start in range(0, kgrid.size, chunk):
        k = kgrid[start:start + chunk, None]
        out[start:start + chunk] = np.max(bvals[None, :] - k * probs[None, :], axis=1)
    return out


def _check_pgrid(pgrid) -> np.ndarray:
    pgrid = as_float_array(pgrid, "pgrid")
    if pgrid.ndim != 1 or pgrid.size < 2 or np.any(np.diff(pgrid) <= 0.0):
        raise ValidationError("pgrid must be 1-d strictly increasing")
    if pgrid[0] < 0.0 or pgrid[-1] > 1.0:
        raise ValidationError("pgrid must lie inside [0, 1]")
    return pgrid


def upper_boundary_from_calls(curve: CallCurve, pgrid=None, *,
                              validate: bool = True) -> ZonoidBoundary:
    """Conjugate transform boundary(p) = min_K [C(K) + p K] on a p grid.

    Endpoint values are pinned exactly: boundary(0) = 0, boundary(1) = mean.
    Grid-backed curves are minimised over their nodes (exact for piecewise
    linear curves); closed-form curves by vectorised golden-section over the
    stated strike domain with a parabolic refinement.
    """
    if validate:
        curve.validate()
    if pgrid is None:
        pgrid = np.linspace(0.0, 1.0, _DEFAULT_GRID_N)
    pgrid = _check_pgrid(pgrid)
    if curve.is_grid:
        vals = _min_over_nodes(curve.strikes, curve.values, pgrid)
    else:
        objective = lambda k: curve(k) + pgrid * k
        lo = np.full(pgrid.size, curve.k_lo)
        hi = np.full(pgrid.size, curve.k_hi)
        _, vals = golden_section_min(objective, lo, hi)
        # the domain endpoints are candidates too (minimiser may sit there)
        vals = np.minimum(vals, curve(curve.k_lo) + pgrid * curve.k_lo)
        vals = np.minimum(vals, curve(curve.k_hi) + pgrid * curve.k_hi)
    vals = np.where(pgrid == 0.0, 0.0, vals)
    vals = np.where(pgrid == 1.0, curve.mean, vals)
    return ZonoidBoundary.from_grid(pgrid, vals, mean=curve.mean,
                                    provenance=dict(curve.provenance))


def _default_kgrid(boundary: ZonoidBoundary, n: int) -> np.ndarray:
    if boundary.is_grid:
        slopes = np.diff(boundary.values) / np.diff(boundary.probs)
        k_lo, k_hi = float(slopes.min()), float(slopes.max())
    else:
        delta = 1e-6
        k_hi = (boundary(delta) - 0.0) / delta
        k_lo = (boundary.mean - boundary(1.0 - delta)) / delta
    if not k_lo < k_hi:
        raise ValidationError("cannot infer a strike grid from this boundary")
    return np.linspace(k_lo, k_hi, n)


def calls_from_upper_boundary(boundary: ZonoidBoundary, kgrid=None, *,
                              validate: bool = True) -> CallCurve:
    """Conjugate transform C(K) = max_{0<=p<=1} [boundary(p) - p K] on a
    strike grid; the p in {0, 1} endpoint candidates (0 and mean - K) are
    always included."""
    if validate:
        boundary.validate()
    if kgrid is None:
        kgrid = _default_kgrid(boundary, _DEFAULT_GRID_N)
    kgrid = as_float_array(kgrid, "kgrid")
    if kgrid.ndim != 1 or kgrid.size < 2 or np.any(np.diff(kgrid) <= 0.0):
        raise ValidationError("kgrid must be 1-d strictly increasing")
    m = boundary.mean
    if boundary.is_grid:
        vals = _max_over_nodes(boundary.probs, boundary.values, kgrid)
    else:
        objective = lambda p: -(boundary(p) - kgrid * p)
        lo = np.full(kgrid.size, _P_EPS)
        hi = np.full(kgrid.size, 1.0 - _P_EPS)
        _, neg = golden_section_min(objective, lo, hi)
        vals = -neg
    vals = np.maximum(vals, 0.0)
    vals = np.maximum(vals, m - kgrid)
    positive = bool(kgrid[0] >= 0.0 and m > 0.0
                    and abs(float(vals[0]) + kgrid[0] - m) <= 1e-6 * _value_scale(m))
    return CallCurve.from_grid(kgrid, vals, mean=m, positive=positive,
                               provenance=dict(boundary.provenance))


def discrete_upper_boundary(dist: DiscreteDistribution, p):
    """Exact boundary of a finite-atom distribution by the greedy threshold
    rule: take the largest atoms first, splitting the marginal atom."""
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise DomainError("p must lie in [0, 1]")
    x_desc = dist.atoms[::-1]
    w_desc = dist.weights[::-1]
    cum_w = np.concatenate(([0.0], np.cumsum(w_desc)))
    cum_xw = np.concatenate(([0.0], np.cumsum(x_desc * w_desc)))
    cum_w[-1] = 1.0
    j = np.searchsorted(cum_w, p_arr, side="left")
    j = np.clip(j, 1, x_desc.size)
    out = cum_xw[j - 1] + x_desc[j - 1] * (p_arr - cum_w[j - 1])
    if np.ndim(p) == 0:
        return float(np.asarray(out).reshape(())[()])
    return out


def boundary_from_quantile_integral(target: Union[DiscreteDistribution, DensityModel], p):
    """Boundary via the integral of the upper quantile of the survival
    function: boundary(p) = int_0^p Theta^{-1}(phi) dphi with
    Theta^{-1}(phi) = sup{K : Theta(K) >= phi}.

    This is an independent route from the conjugate transform and is used to
    cross-check it.  Densities must be integrable (the cauchy family is not).
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(np.isnan(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise DomainError("p must lie in [0, 1]")
    if isinstance(target, DiscreteDistribution):
        # integrate the step function Theta^{-1} piece by piece
        x_desc = target.atoms[::-1]
        tails = np.concatenate(([0.0], np.cumsum(target.weights[::-1])))
        tails[-1] = 1.0
        taken = np.clip(p_arr[:, None] - tails[None, :-1], 0.0,
                        np.diff(tails)[None, :])
        out = taken @ x_desc
    elif isinstance(target, DensityModel):
        if not target.has_mean:
            raise DomainError(f"{target.family} has no mean; boundary undefined")
        upper = float(target.quantile(1.0 - _Q_EPS))
        integrand = lambda x: x * float(target.pdf(x))
        out = np.empty(p_arr.size)
        for i, pi in enumerate(p_arr):
            if pi <= 0.0:
                out[i] = 0.0
                continue
            lo = float(target.quantile(max(1.0 - pi, _Q_EPS)))
            val, _ = integrate.quad(integrand, lo, upper,
                                    epsabs=1e-12, epsrel=1e-12, limit=300)
            out[i] = val
    else:
        raise UnsupportedError(f"no quantile-integral route for {type(target).__name__}")
    if np.ndim(p) == 0:
        return float(out[0])
    return out


def inverse_boundary_positive(curve: CallCurve, q: float) -> float:
    """Inverse boundary of a positive variable: the p with boundary(p) = q,
    computed by the direct formula p = max_{K > 0} (q - C(K)) / K.

    Requires a positivity certificate on the curve (so C(K) = mean - K for
    K <= 0) and 0 < q < mean; the endpoint limits are 0 and 1.
    """
    if not curve.positive:
        raise UnsupportedError("inverse_boundary_positive needs a positive-variable curve")
    m = curve.mean
    if m <= 0.0:
        raise DomainError("positive variable must have a positive mean")
    if not np.isfinite(q) or q <= 0.0 or q >= m:
        raise DomainError(f"q must lie strictly inside (0, mean), got {q!r}")
    scale = _value_scale(m)
    if abs(float(curve(0.0)) - m) > 1e-6 * scale:
        raise ValidationError("curve is not consistent with a positive variable: C(0) != mean")
    k_hi = curve.k_hi
    k_lo = max(curve.k_lo, 1e-12 * scale)
    if curve.is_grid:
        nodes = curve.strikes[curve.strikes > 0.0]
        ratios = (q - curve(nodes)) / nodes
        return float(np.clip(np.max(ratios), 0.0, 1.0))
    # maximise (q - C(K))/K; unimodal in K for convex C, searched in log-K
    neg = lambda u: -(q - curve(np.exp(u))) / np.exp(u)
    us = np.linspace(math.log(k_lo), math.log(k_hi), 257)
    vals = neg(us)
    i = int(np.argmin(vals))
    lo_u = us[max(i - 1, 0)]
    hi_u = us[min(i + 1, us.size - 1)]
    _, best = golden_section_min(neg, float(lo_u), float(hi_u))
    return float(np.clip(-best, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Order and symmetry checks
# ---------------------------------------------------------------------------

def check_convex_order(curve_x: CallCurve, curve_y: CallCurve, kgrid=None,
                       *, mean_tol: float = 1e-10, slack: float = 1e-12) -> bool:
    """True when X is dominated by Y in the convex order: equal means and
    C_X <= C_Y at every grid strike."""
    if abs(curve_x.mean - curve_y.mean) > mean_tol:
        raise DomainError("convex order needs equal means")
    if kgrid is None:
        k_lo = min(curve_x.k_lo, curve_y.k_lo)
        k_hi = max(curve_x.k_hi, curve_y.k_hi)
        kgrid = np.linspace(k_lo, k_hi, 1001)
    kgrid = as_float_array(kgrid, "kgrid")
    gap = curve_x(kgrid) - curve_y(kgrid)
    return bool(np.max(gap) <= slack * _value_scale(curve_x.mean))


def check_arithmetic_symmetry(curve: CallCurve, kgrid=None, *, tol: float = 1e-8) -> bool:
    """True when C(K) = -K + C(-K) across the grid, i.e. X is symmetric
    about 0 (equivalently the boundary satisfies b(p) = b(1-p))."""
    if kgrid is None:
        if not (curve.k_lo < 0.0 < curve.k_hi):
            raise DomainError("need a strike domain straddling 0")
        a = min(-curve.k_lo, curve.k_hi)
        kgrid = np.linspace(-a, a, 1001)
    kgrid = as_float_array(kgrid, "kgrid")
    if np.max(np.abs(np.sort(kgrid) + np.sort(-kgrid)[::-1])) > 1e-12:
        raise DomainError("strike grid must be symmetric about 0")
    gap = curve(kgrid) - (-kgrid + curve(-kgrid))
    return bool(np.max(np.abs(gap)) <= tol)


def check_geometric_symmetry(curve: CallCurve, kgrid=None, *, tol: float = 1e-6) -> bool:
    """True when C(K) = 1 - K + K C(1/K) across the grid (put-call symmetry
    of a positive variable with mean 1)."""
    if abs(curve.mean - 1.0) > 1e-10:
        raise DomainError("geometric symmetry requires mean exactly 1")
    if not curve.positive:
        raise UnsupportedError("geometric symmetry requires a positive-variable curve")
    if kgrid is None:
        if curve.k_hi <= 1.0:
            raise DomainError("strike domain must extend beyond 1")
        span = math.log(curve.k_hi)
        if curve.k_lo > 0.0:
            span = min(span, -math.log(curve.k_lo))
        kgrid = np.exp(np.linspace(-span, span, 1001))
    kgrid = as_float_array(kgrid, "kgrid")
    if np.any(kgrid <= 0.0):
        raise DomainError("strikes must be positive")
    gap = curve(kgrid) - (1.0 - kgrid + kgrid * curve(1.0 / kgrid))
    return bool(np.max(np.abs(gap)) <= tol)


# ---------------------------------------------------------------------------
# Convex projection of noisy empirical curves
# ---------------------------------------------------------------------------

def project_convex_decreasing(strikes, values) -> Tuple[np.ndarray, float]:
    """Project a noisy curve onto the cone of convex, non-increasing curves
    with slopes in [-1, 0] (every true call curve satisfies this).

    Returns (projected_values, sup_distance).  A curve already in the cone is
    returned unchanged with distance 0.
    """
    x = as_float_array(strikes, "strikes")
    y = as_float_array(values, "values")
    if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
        raise ValidationError("strikes and values must be matching 1-d arrays")
    if np.any(np.diff(x) <= 0.0):
        raise ValidationError("strikes must be strictly increasing")
    hull_idx = [0]
    for i in range(1, x.size):
        while len(hull_idx) >= 2:
            j, k = hull_idx[-2], hull_idx[-1]
            # drop k when it sits on or above the chord j -> i
            if (y[k] - y[j]) * (x[i] - x[j]) >= (y[i] - y[j]) * (x[k] - x[j]):
                hull_idx.pop()
            else:
                break
        hull_idx.append(i)
    hull = np.interp(x, x[hull_idx], y[hull_idx])
    slopes = np.diff(hull) / np.diff(x)
    clipped = np.clip(slopes, -1.0, 0.0)
    inside = np.nonzero(slopes == clipped)[0]
    anchor = int(inside[0]) if inside.size else int(np.argmin(hull))
    out = np.empty_like(hull)
    out[anchor] = hull[anchor]
    for i in range(anchor - 1, -1, -1):
        out[i] = out[i + 1] - clipped[i] * (x[i + 1] - x[i])
    for i in range(anchor + 1, x.size):
        out[i] = out[i - 1] + clipped[i - 1] * (x[i] - x[i - 1])
    return out, float(np.max(np.abs(y - out)))
