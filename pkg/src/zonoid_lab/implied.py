"""Generalized implied volatility for the geometric family.

The normalized call (unit mean, strike K > 0)

    c(y, K) = F(V_y(K) + y) - K F(V_y(K)),   c(0, K) = (1 - K)^+

is continuous and non-decreasing in the level y, strictly increasing
wherever K lies inside the ratio range of the density, with limit 1 as
y -> infinity.  Three routes are provided:

* ``vega_integral``: c(y,K) - (1-K)^+ as the integral of the level-vega
  u -> f(V_u(K) + u), an independent cross-check of the closed form;
* ``implied_y_root``: invert c in y by bracketed root-finding;
* ``implied_y_minimization``: recover y directly as
  min_p [F^{-1}(c + pK) - F^{-1}(p)] over feasible p, together with the
  minimiser p_hat (which equals F(V_{y*}(K)) at the optimum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, optimize

from .densities import DensityModel
from .errors import DomainError, RangeError
from .numerics import as_float_array, golden_section_min
from .pricing import family_call_geometric

_DEGENERATE_TOL = 1e-14
_P_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class ImpliedQuery:
    """A normalized price c at strike K to invert: (1-K)^+ <= c < 1, K > 0."""

    density: DensityModel
    c: float
    k: float

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0.0):
            raise DomainError(f"strike must be positive and finite, got {self.k!r}")
        if not np.isfinite(self.c):
            raise DomainError("price must be finite")
        intrinsic = max(1.0 - self.k, 0.0)
        if self.c < intrinsic or self.c >= 1.0:
            raise DomainError(
                f"price {self.c!r} outside [(1-K)^+, 1) = [{intrinsic!r}, 1)")

    @property
    def intrinsic(self) -> float:
        return max(1.0 - self.k, 0.0)


def normalized_call(density: DensityModel, y: float, k: float) -> float:
    """c(y, K) for the unit-mean geometric family; y = 0 gives (1 - K)^+."""
    if not (np.isfinite(y) and y >= 0.0):
        raise DomainError(f"y must be non-negative, got {y!r}")
    if not (np.isfinite(k) and k > 0.0):
        raise DomainError(f"strike must be positive, got {k!r}")
    if y == 0.0:
        return max(1.0 - k, 0.0)
    return float(family_call_geometric(density, 1.0, y, k))


def vega_integral(density: DensityModel, y: float, k: float) -> float:
    """int_0^y f(V_u(K) + u) du, the exercise-boundary density integrated
    along the level; equals c(y,K) - (1-K)^+.  The integrand is zero for
    levels u at which K falls outside the ratio range."""
    if not (np.isfinite(y) and y >= 0.0):
        raise DomainError(f"y must be non-negative, got {y!r}")
    if not (np.isfinite(k) and k > 0.0):
        raise DomainError(f"strike must be positive, got {k!r}")
    if y == 0.0:
        return 0.0
    from .densities import inverse_ratio

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        r_lo, r_hi = density.ratio_range(u)
        if not (r_lo < k < r_hi):
            return 0.0
        v = inverse_ratio(density, u, k)
        return float(density.pdf(v + u))

    points = None
    if density.family == "logistic" and k != 1.0:
        u0 = density.scale * abs(math.log(k))
        if 0.0 < u0 < y:
            points = [u0]
    val, _ = integrate.quad(integrand, 0.0, y, points=points,
                            epsabs=1e-11, epsrel=1e-11, limit=300)
    return float(val)


def implied_y_root(query: ImpliedQuery) -> float:
    """The level y* with c(y*, K) = c, by bracketed root-finding on the
    monotone map y -> c(y, K).  Prices at the intrinsic value return 0."""
    c, k, density = query.c, query.k, query.density
    if c - query.intrinsic < _DEGENERATE_TOL:
        return 0.0
    g = lambda y: normalized_call(density, y, k) - c
    y_hi = 1.0
    for _ in range(200):
        if g(y_hi) >= 0.0:
            break
        y_hi *= 2.0
    else:
        raise RangeError(f"no level y reaches price {c!r} at strike {k!r}")
    y_star = optimize.brentq(g, 0.0, y_hi, xtol=1e-14, rtol=8.9e-16, maxiter=300)
    return float(y_star)


def implied_y_minimization(query: ImpliedQuery, n_scan: int = 512) -> Tuple[float, float]:
    """The level recovered as y* = min_p [F^{-1}(c + pK) - F^{-1}(p)] over
    feasible p (0 < p and c + pK < 1); returns (y*, p_hat).

    A coarse scan locates the minimum basin (the objective is not proven
    unimodal), then golden-section refines it.  Prices at the intrinsic
    value are degenerate: (0, nan) is returned.
    """
    c, k, density = query.c, query.k, query.density
    if c - query.intrinsic < _DEGENERATE_TOL:
        return 0.0, float("nan")
    p_max = min(1.0, (1.0 - c) / k)
    lo = _P_EPS
    hi = p_max - _P_EPS
    if not lo < hi:
        raise DomainError("empty feasible range for the minimization")

    def objective(p):
        p = np.asarray(p, dtype=np.float64)
        return (np.asarray(density.quantile(np.clip(c + p * k, 0.0, 1.0)))
                - np.asarray(density.quantile(p)))

    ps = np.linspace(lo, hi, n_scan)
    vals = np.atleast_1d(objective(ps))
    i = int(np.argmin(vals))
    b_lo = ps[max(i - 1, 0)]
    b_hi = ps[min(i + 1, n_scan - 1)]
    p_hat, y_star = golden_section_min(objective, float(b_lo), float(b_hi))
    p_hat, y_star = float(p_hat), float(y_star)
    if vals[i] < y_star:
        p_hat, y_star = float(ps[i]), float(vals[i])
    return max(y_star, 0.0), p_hat


def implied_y(query: ImpliedQuery, method: str = "root"):
    """Dispatch: "root" -> y*, "min" -> (y*, p_hat)."""
    if method == "root":
        return implied_y_root(query)
    if method == "min":
        return implied_y_minimization(query)
    raise DomainError(f"unknown implied method {method!r}")
