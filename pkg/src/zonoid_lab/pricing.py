"""Closed-form call prices.

Two classical benchmarks (arithmetic/normal and geometric/lognormal) plus the
general family formulas for marginals built from a log-concave density model:

* linear family, mean s and level y: C(K) = y [ f(U(w)) - F(U(w)) w ] with
  w = (K - s)/y, where U inverts the logarithmic slope of the density f
  (the survival probability at strike K is F(U(w)));
* geometric family, mean s and level y: C(K) = s F(V + y) - K F(V) with
  V = V_y(K / s), where V_y inverts the ratio x -> f(x + y)/f(x) (the
  survival probability at strike K is F(V)).

Strikes outside the reachable range are clamped to the intrinsic bounds
(mean - K)^+ or 0; the ``*_with_flag`` variants report when clamping fired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special

from .densities import DensityModel, inverse_log_slope, inverse_ratio
from .errors import DomainError, ValidationError
from .numerics import as_float_array

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT2PI


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the two benchmark models: spot, volatility, maturity."""

    s0: float
    sigma: float
    t: float

    def __post_init__(self):
        for name in ("s0", "sigma", "t"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite")
        if self.sigma <= 0.0:
            raise ValidationError("sigma must be positive")
        if self.t < 0.0:
            raise ValidationError("t must be non-negative")


def bachelier_call(params: ModelParams, k):
    """Arithmetic model: X = s0 + sigma W_t, C = v phi(d) + (s0 - K) Phi(d)
    with v = sigma sqrt(t), d = (s0 - K)/v.  t = 0 gives the intrinsic value."""
    k = as_float_array(k, "strike")
    if params.t == 0.0:
        out = np.maximum(params.s0 - k, 0.0)
    else:
        v = params.sigma * math.sqrt(params.t)
        d = (params.s0 - k) / v
        out = v * _phi(d) + (params.s0 - k) * special.ndtr(d)
    if np.ndim(k) == 0:
        return float(np.asarray(out).reshape(())[()])
    return out


def black_scholes_call(params: ModelParams, k):
    """Geometric model: X = s0 exp(sigma W_t - sigma^2 t / 2),
    C = s0 Phi(d1) - K Phi(d2).  Strikes must be positive; t = 0 gives the
    intrinsic value."""
    if params.s0 <= 0.0:
        raise DomainError("geometric model requires a positive spot")
    k = as_float_array(k, "strike")
    if np.any(np.atleast_1d(k) <= 0.0):
        raise DomainError("geometric model strikes must be positive")
    if params.t == 0.0:
        out = np.maximum(params.s0 - k, 0.0)
    else:
        v = params.sigma * math.sqrt(params.t)
        d1 = np.log(params.s0 / k) / v + 0.5 * v
        out = params.s0 * special.ndtr(d1) - k * special.ndtr(d1 - v)
    if np.ndim(k) == 0:
        return float(np.asarray(out).reshape(())[()])
    return out


# ---------------------------------------------------------------------------
# Family call formulas
# ---------------------------------------------------------------------------

def _scalar_or_array(out, k):
    if np.ndim(k) == 0:
        return float(np.asarray(out).reshape(())[()])
    return out


def family_call_linear_with_flag(model: DensityModel, s: float, yval: float, k):
    """Linear family call price and a clamp flag.

    For w = (K - s)/yval inside the range of the log-slope of f,
    C(K) = yval [ f(U(w)) - F(U(w)) w ]; outside, the price saturates at the
    intrinsic bounds (flag True): mean - K below, 0 above.
    """
    if yval <= 0.0 or not np.isfinite(yval):
        raise DomainError("yval must be positive and finite")
    if not np.isfinite(s):
        raise DomainError("s must be finite")
    k = as_float_array(k, "strike")
    karr = np.atleast_1d(k)
    w = (karr - s) / yval
    w_lo, w_hi = model.log_slope_range()
    out = np.empty(w.shape)
    flagged = np.zeros(w.shape, dtype=bool)
    below = w <= w_lo
    above = w >= w_hi
    inside = ~(below | above)
    out[below] = s - karr[below]
    out[above] = 0.0
    flagged[below | above] = True
    if np.any(inside):
        u = np.asarray(inverse_log_slope(model, w[inside]), dtype=np.float64)
        fu = np.asarray(model.pdf(u), dtype=np.float64)
        pstar = np.asarray(model.cdf(u), dtype=np.float64)
        out[inside] = yval * (fu - pstar * w[inside])
    return _scalar_or_array(out, k), _scalar_or_array(flagged, k)


def family_call_linear(model: DensityModel, s: float, yval: float, k):
    return family_call_linear_with_flag(model, s, yval, k)[0]


def survival_linear(model: DensityModel, s: float, yval: float, k):
    """P(X > K) for the linear family: F(U((K - s)/yval)) (the minus-call
    slope), clamped to {1, 0} outside the reachable strike range."""
    if yval <= 0.0 or not np.isfinite(yval):
        raise DomainError("yval must be positive and finite")
    k = as_float_array(k, "strike")
    w = (np.atleast_1d(k) - s) / yval
    w_lo, w_hi = model.log_slope_range()
    out = np.empty(w.shape)
    out[w <= w_lo] = 1.0
    out[w >= w_hi] = 0.0
    inside = (w > w_lo) & (w < w_hi)
    if np.any(inside):
        u = np.asarray(inverse_log_slope(model, w[inside]), dtype=np.float64)
        out[inside] = np.asarray(model.cdf(u), dtype=np.float64)
    return _scalar_or_array(out, k)


def family_call_geometric_with_flag(model: DensityModel, s: float, y: float, k):
    """Geometric family call price and a clamp flag.

    For r = K/s inside the range of x -> f(x + y)/f(x),
    C(K) = s F(V + y) - K F(V) with V = V_y(K/s); outside, the price
    saturates at the intrinsic bounds (flag True).
    """
    if s <= 0.0 or not np.isfinite(s):
        raise DomainError("s must be positive and finite")
    if y <= 0.0 or not np.isfinite(y):
        raise DomainError("y must be positive and finite")
    k = as_float_array(k, "strike")
    karr = np.atleast_1d(k)
    if np.any(karr < 0.0):
        raise DomainError("geometric family strikes must be non-negative")
    r = karr / s
    r_lo, r_hi = model.ratio_range(y)
    out = np.empty(r.shape)
    flagged = np.zeros(r.shape, dtype=bool)
    below = r <= r_lo
    above = r >= r_hi
    inside = ~(below | above)
    out[below] = s - karr[below]
    out[above] = 0.0
    flagged[below | above] = True
    if np.any(inside):
        v = np.asarray(inverse_ratio(model, y, r[inside]), dtype=np.float64)
        out[inside] = (s * np.asarray(model.cdf(v + y), dtype=np.float64)
                       - karr[inside] * np.asarray(model.cdf(v), dtype=np.float64))
    return _scalar_or_array(out, k), _scalar_or_array(flagged, k)


def family_call_geometric(model: DensityModel, s: float, y: float, k):
    return family_call_geometric_with_flag(model, s, y, k)[0]


def survival_geometric(model: DensityModel, s: float, y: float, k):
    """P(X > K) for the geometric family: F(V_y(K/s)) (the minus-call
    slope), clamped to {1, 0} outside the reachable strike range."""
    if s <= 0.0 or y <= 0.0:
        raise DomainError("s and y must be positive")
    k = as_float_array(k, "strike")
    r = np.atleast_1d(k) / s
    r_lo, r_hi = model.ratio_range(y)
    out = np.empty(r.shape)
    out[r <= r_lo] = 1.0
    out[r >= r_hi] = 0.0
    inside = (r > r_lo) & (r < r_hi)
    if np.any(inside):
        v = np.asarray(inverse_ratio(model, y, r[inside]), dtype=np.float64)
        out[inside] = np.asarray(model.cdf(v), dtype=np.float64)
    return _scalar_or_array(out, k)


def survival(kind: str, model: DensityModel, s: float, yval: float, k):
    if kind == "linear":
        return survival_linear(model, s, yval, k)
    if kind == "geometric":
        return survival_geometric(model, s, yval, k)
    raise ValidationError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# Curve constructors
# ---------------------------------------------------------------------------

def bachelier_curve(params: ModelParams, width: float = 8.0):
    """Call curve of the arithmetic model on s0 -/+ width sigma sqrt(t)."""
    from .zonoid import CallCurve

    v = params.sigma * math.sqrt(max(params.t, 1e-300))
    half = width * v
    return CallCurve.from_function(
        lambda k: bachelier_call(params, k), mean=params.s0,
        domain=(params.s0 - half, params.s0 + half),
        provenance={"model": "arithmetic", "s0": params.s0,
                    "sigma": params.sigma, "t": params.t})


def black_scholes_curve(params: ModelParams, width: float = 8.0):
    """Call curve of the geometric model on a log-symmetric strike interval."""
    from .zonoid import CallCurve

    v = params.sigma * math.sqrt(max(params.t, 1e-300))
    k_lo = params.s0 * math.exp(-width * v - 0.5 * v * v)
    k_hi = params.s0 * math.exp(width * v - 0.5 * v * v)
    return CallCurve.from_function(
        lambda k: black_scholes_call(params, k), mean=params.s0,
        domain=(k_lo, k_hi), positive=True,
        provenance={"model": "geometric", "s0": params.s0,
                    "sigma": params.sigma, "t": params.t})


def linear_family_curve(model: DensityModel, s: float, yval: float,
                        p_cut: float = 1e-9):
    """Call curve of the linear-family marginal at level yval, on the strike
    range reachable through the density's quantiles."""
    from .zonoid import CallCurve

    q_lo = float(model.quantile(p_cut))
    q_hi = float(model.quantile(1.0 - p_cut))
    # the log-slope decreases, so the strike range runs from the right tail
    # slope (most negative w) to the left tail slope (most positive w)
    k_lo = s + yval * float(model.log_slope(q_hi))
    k_hi = s + yval * float(model.log_slope(q_lo))
    return CallCurve.from_function(
        lambda k: family_call_linear(model, s, yval, k), mean=s,
        domain=(k_lo, k_hi),
        provenance={"family": "linear", "density": model.family,
                    "s": s, "y": yval})


def geometric_family_curve(model: DensityModel, s: float, y: float,
                           p_cut: float = 1e-9):
    """Call curve of the geometric-family marginal at level y (positive
    variable with mean s)."""
    from .zonoid import CallCurve

    q_lo = float(model.quantile(p_cut))
    q_hi = float(model.quantile(1.0 - p_cut))
    r_lo = math.exp(float(model.log_pdf(q_hi + y)) - float(model.log_pdf(q_hi)))
    r_hi = math.exp(float(model.log_pdf(q_lo + y)) - float(model.log_pdf(q_lo)))
    k_lo = max(s * r_lo, 0.0)
    k_hi = s * r_hi
    return CallCurve.from_function(
        lambda k: family_call_geometric(model, s, y, k), mean=s,
        domain=(k_lo, k_hi), positive=True,
        provenance={"family": "geometric", "density": model.family,
                    "s": s, "y": y})
