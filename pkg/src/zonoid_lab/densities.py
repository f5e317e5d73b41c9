"""Density models on the real line and the inverse maps derived from them.

A :class:`DensityModel` bundles the four evaluators (pdf, pdf derivative, cdf,
quantile) for a location/scale family.  On top of those the module exposes the
two inverse maps that drive everything downstream:

* ``inverse_log_slope`` inverts the decreasing map x -> (log f)'(x); the
  result is the deep parameter behind linear-family pricing.
* ``inverse_ratio`` inverts the decreasing map x -> f(x + y)/f(x) for y > 0;
  it is the geometric-family analogue.

Both maps are monotone exactly when f is log-concave, which is why the
operations insist on a log-concavity certificate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special

from .errors import DomainError, RangeError, UnsupportedError, ValidationError
from .numerics import as_float_array, monotone_root, second_differences, require_uniform

_SQRT2PI = math.sqrt(2.0 * math.pi)
_FAMILIES = ("gaussian", "logistic", "cauchy", "custom")

# Quantile level used to clip root-finding brackets for custom models.
_BRACKET_EPS = 1e-15


@dataclass(frozen=True)
class ConcavityReport:
    """Outcome of a grid second-difference concavity check.

    ``max_violation`` is the largest second difference seen (a concave
    function has non-positive ones); ``witness`` is the abscissa triple
    attaining it when the check fails.
    """

    is_concave: bool
    witness: Optional[Tuple[float, float, float]]
    max_violation: float


@dataclass(frozen=True)
class DensityModel:
    """A positive density on R from a named family or user callables.

    Parameters
    ----------
    family : one of ``gaussian``, ``logistic``, ``cauchy``, ``custom``.
    location, scale : affine family parameters; ``scale`` must be positive.
    pdf_fn, pdf_prime_fn, cdf_fn, quantile_fn : required for ``custom``
        models; each must be vectorised over numpy arrays.
    """

    family: str
    location: float = 0.0
    scale: float = 1.0
    pdf_fn: Optional[Callable] = None
    pdf_prime_fn: Optional[Callable] = None
    cdf_fn: Optional[Callable] = None
    quantile_fn: Optional[Callable] = None
    _custom_log_concave: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown density family {self.family!r}")
        if not (np.isfinite(self.location) and np.isfinite(self.scale)):
            raise ValidationError("location and scale must be finite")
        if self.scale <= 0.0:
            raise ValidationError("scale must be positive")
        if self.family == "custom":
            missing = [name for name, fn in (
                ("pdf_fn", self.pdf_fn), ("pdf_prime_fn", self.pdf_prime_fn),
                ("cdf_fn", self.cdf_fn), ("quantile_fn", self.quantile_fn),
            ) if fn is None]
            if missing:
                raise ValidationError(
                    f"custom models must supply all four evaluators; missing {missing}")
            report = check_log_concavity(self, self.default_grid())
            object.__setattr__(self, "_custom_log_concave", report.is_concave)
        elif self.pdf_fn or self.pdf_prime_fn or self.cdf_fn or self.quantile_fn:
            raise ValidationError("evaluator callables are only valid for family='custom'")

    # -- constructors -----------------------------------------------------

    @classmethod
    def gaussian(cls, location: float = 0.0, scale: float = 1.0) -> "DensityModel":
        return cls("gaussian", location, scale)

    @classmethod
    def logistic(cls, location: float = 0.0, scale: float = 1.0) -> "DensityModel":
        return cls("logistic", location, scale)

    @classmethod
    def cauchy(cls, location: float = 0.0, scale: float = 1.0) -> "DensityModel":
        return cls("cauchy", location, scale)

    @classmethod
    def custom(cls, pdf, pdf_prime, cdf, quantile,
               location: float = 0.0, scale: float = 1.0) -> "DensityModel":
        return cls("custom", location, scale, pdf_fn=pdf, pdf_prime_fn=pdf_prime,
                   cdf_fn=cdf, quantile_fn=quantile)

    @classmethod
    def from_spec(cls, spec) -> "DensityModel":
        """Build a model from ``{"family": ..., "location": ..., "scale": ...}``
        (dict or JSON string); a bare family name is accepted as shorthand."""
        if isinstance(spec, str):
            text = spec.strip()
            if text.startswith("{"):
                spec = json.loads(text)
            else:
                spec = {"family": text}
        if not isinstance(spec, dict):
            raise ValidationError(f"density spec must be a dict or string, got {spec!r}")
        family = spec.get("family")
        if family == "custom":
            raise UnsupportedError("custom models cannot be built from a JSON spec")
        return cls(str(family), float(spec.get("location", 0.0)),
                   float(spec.get("scale", 1.0)))

    def to_spec(self) -> dict:
        if self.family == "custom":
            raise UnsupportedError("custom models have no serialisable spec")
        return {"family": self.family, "location": self.location, "scale": self.scale}

    # -- basic evaluators --------------------------------------------------

    def _z(self, x):
        return (x - self.location) / self.scale

    def pdf(self, x):
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            z = self._z(x)
            out = np.exp(-0.5 * z * z) / (self.scale * _SQRT2PI)
        elif self.family == "logistic":
            p = special.expit(self._z(x))
            out = p * (1.0 - p) / self.scale
        elif self.family == "cauchy":
            z = self._z(x)
            out = 1.0 / (math.pi * self.scale * (1.0 + z * z))
        else:
            out = np.asarray(self.pdf_fn(x), dtype=np.float64)
        return _match(out, x)

    def pdf_prime(self, x):
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            z = self._z(x)
            out = -z / self.scale * np.exp(-0.5 * z * z) / (self.scale * _SQRT2PI)
        elif self.family == "logistic":
            p = special.expit(self._z(x))
            out = p * (1.0 - p) * (1.0 - 2.0 * p) / self.scale ** 2
        elif self.family == "cauchy":
            z = self._z(x)
            out = -2.0 * z / (math.pi * self.scale ** 2 * (1.0 + z * z) ** 2)
        else:
            out = np.asarray(self.pdf_prime_fn(x), dtype=np.float64)
        return _match(out, x)

    def cdf(self, x):
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            out = special.ndtr(self._z(x))
        elif self.family == "logistic":
            out = special.expit(self._z(x))
        elif self.family == "cauchy":
            out = 0.5 + np.arctan(self._z(x)) / math.pi
        else:
            out = np.asarray(self.cdf_fn(x), dtype=np.float64)
        return _match(out, x)

    def quantile(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise DomainError(f"probability level outside [0, 1]: {p!r}")
        if self.family == "gaussian":
            out = self.location + self.scale * special.ndtri(p)
        elif self.family == "logistic":
            with np.errstate(divide="ignore"):
                out = self.location + self.scale * special.logit(p)
        elif self.family == "cauchy":
            out = np.where(
                p == 0.0, -np.inf,
                np.where(p == 1.0, np.inf,
                         self.location + self.scale * np.tan(math.pi * (p - 0.5))))
        else:
            out = np.asarray(self.quantile_fn(p), dtype=np.float64)
        return _match(out, p)

    def log_pdf(self, x):
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            z = self._z(x)
            out = -0.5 * z * z - math.log(self.scale * _SQRT2PI)
        elif self.family == "logistic":
            z = np.abs(self._z(x))
            out = -z - 2.0 * np.log1p(np.exp(-z)) - math.log(self.scale)
        elif self.family == "cauchy":
            z = self._z(x)
            out = -np.log1p(z * z) - math.log(math.pi * self.scale)
        else:
            with np.errstate(divide="ignore"):
                out = np.log(np.asarray(self.pdf_fn(x), dtype=np.float64))
        return _match(out, x)

    def log_slope(self, x):
        """(log f)'(x) = f'(x)/f(x); decreasing exactly when f is log-concave."""
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            out = -self._z(x) / self.scale
        elif self.family == "logistic":
            out = -np.tanh(0.5 * self._z(x)) / self.scale
        elif self.family == "cauchy":
            z = self._z(x)
            out = -2.0 * z / (self.scale * (1.0 + z * z))
        else:
            out = (np.asarray(self.pdf_prime_fn(x), dtype=np.float64)
                   / np.asarray(self.pdf_fn(x), dtype=np.float64))
        return _match(out, x)

    def log_curvature(self, x):
        """(log f)''(x); analytic for the built-ins, central differences of
        (log f)' at step 1e-5*scale for custom models."""
        x = as_float_array(x, "x")
        if self.family == "gaussian":
            out = np.full_like(np.atleast_1d(x), -1.0 / self.scale ** 2)
        elif self.family == "logistic":
            p = special.expit(self._z(x))
            out = -2.0 * p * (1.0 - p) / self.scale ** 2
        elif self.family == "cauchy":
            z = self._z(x)
            out = 2.0 * (z * z - 1.0) / (self.scale ** 2 * (1.0 + z * z) ** 2)
        else:
            h = 1e-5 * self.scale
            out = (self.log_slope(x + h) - self.log_slope(x - h)) / (2.0 * h)
        return _match(out, x)

    # -- structure ---------------------------------------------------------

    @property
    def is_log_concave(self) -> bool:
        if self.family in ("gaussian", "logistic"):
            return True
        if self.family == "cauchy":
            return False
        return self._custom_log_concave

    @property
    def has_mean(self) -> bool:
        """Whether the density integrates |x| (cauchy does not)."""
        return self.family != "cauchy"

    def default_grid(self, n: int = 1001, half_width: float = 8.0) -> np.ndarray:
        return np.linspace(self.location - half_width * self.scale,
                           self.location + half_width * self.scale, n)

    def log_slope_range(self) -> Tuple[float, float]:
        """Open range (w_min, w_max) of (log f)' over R."""
        if self.family == "gaussian":
            return (-np.inf, np.inf)
        if self.family == "logistic":
            return (-1.0 / self.scale, 1.0 / self.scale)
        if self.family == "cauchy":
            raise UnsupportedError("cauchy log-slope is not monotone")
        eps = 1e-12
        lo = float(self.log_slope(self.quantile(1.0 - eps)))
        hi = float(self.log_slope(self.quantile(eps)))
        return (lo, hi)

    def ratio_range(self, y: float) -> Tuple[float, float]:
        """Open range (r_min, r_max) of x -> f(x+y)/f(x) for y > 0."""
        if y <= 0.0 or not np.isfinite(y):
            raise DomainError("y must be positive and finite")
        if self.family == "gaussian":
            return (0.0, np.inf)
        if self.family == "logistic":
            return (math.exp(-y / self.scale), math.exp(y / self.scale))
        if self.family == "cauchy":
            raise UnsupportedError("cauchy ratio map is not monotone")
        eps = 1e-12
        x_hi, x_lo = self.quantile(1.0 - eps), self.quantile(eps)
        lo = math.exp(float(self.log_pdf(x_hi + y) - self.log_pdf(x_hi)))
        hi = math.exp(float(self.log_pdf(x_lo + y) - self.log_pdf(x_lo)))
        return (lo, hi)


def _match(out, template):
    out = np.asarray(out, dtype=np.float64)
    if np.ndim(template) == 0:
        return float(out.reshape(())[()] if out.ndim else out)
    return out


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def eval_density(model: DensityModel, x):
    """f(x) for finite x (vectorised)."""
    return model.pdf(x)


def eval_quantile(model: DensityModel, p):
    """F^{-1}(p) for p in [0, 1]; the endpoints map to -inf/+inf."""
    return model.quantile(p)


def inverse_log_slope(model: DensityModel, w):
    """U(w): the unique x with (log f)'(x) = w, for log-concave f.

    Accepts scalars or arrays.  Raises RangeError when any w falls outside
    the range of (log f)' and UnsupportedError when the model carries no
    log-concavity certificate.
    """
    if not model.is_log_concave:
        raise UnsupportedError(
            f"inverse_log_slope needs a log-concave model, got {model.family}")
    w_arr = np.asarray(w, dtype=np.float64)
    if not np.all(np.isfinite(w_arr)):
        raise DomainError("w must be finite")
    if model.family == "gaussian":
        return _match(model.location - w_arr * model.scale ** 2, w)
    if model.family == "logistic":
        ws = w_arr * model.scale
        if np.any(ws <= -1.0) or np.any(ws >= 1.0):
            raise RangeError(f"w={w!r} outside the logistic log-slope range")
        return _match(model.location + model.scale * special.logit((1.0 - ws) * 0.5), w)
    lo = model.quantile(_BRACKET_EPS)
    hi = model.quantile(1.0 - _BRACKET_EPS)
    solve = lambda wi: _clipped_root(lambda t: float(model.log_slope(t)),
                                     wi, model, lo, hi)
    if np.ndim(w) == 0:
        return solve(float(w_arr))
    return np.array([solve(wi) for wi in w_arr.ravel()]).reshape(w_arr.shape)


def inverse_ratio(model: DensityModel, y: float, r):
    """V_y(r): the unique x with f(x + y)/f(x) = r, for log-concave f and y > 0.

    Accepts a scalar or array of ratios r.
    """
    if not model.is_log_concave:
        raise UnsupportedError(
            f"inverse_ratio needs a log-concave model, got {model.family}")
    if not (np.isfinite(y) and y > 0.0):
        raise DomainError("y must be positive and finite")
    r_arr = np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(r_arr) & (r_arr > 0.0)):
        raise RangeError(f"r must be positive and finite, got {r!r}")
    if model.family == "gaussian":
        out = model.location - model.scale ** 2 * np.log(r_arr) / y - 0.5 * y
        return _match(out, r)
    if model.family == "logistic":
        # Solve lam*((1+u)/(1+lam*u))^2 = r for u = exp(-(x-loc)/scale).
        a = 0.5 * np.log(r_arr) + 0.5 * y / model.scale
        b = 0.5 * np.log(r_arr) - 0.5 * y / model.scale
        if np.any(a <= 0.0) or np.any(b >= 0.0):
            raise RangeError(f"r={r!r} outside the logistic ratio range for y={y!r}")
        log_u = np.log(np.expm1(a)) - np.log(-np.expm1(b))
        return _match(model.location - model.scale * log_u, r)
    lo = model.quantile(_BRACKET_EPS)
    hi = model.quantile(1.0 - _BRACKET_EPS)
    fn = lambda t: float(model.log_pdf(t + y) - model.log_pdf(t))
    if np.ndim(r) == 0:
        return _clipped_root(fn, math.log(float(r_arr)), model, lo, hi)
    return np.array([_clipped_root(fn, math.log(ri), model, lo, hi)
                     for ri in r_arr.ravel()]).reshape(r_arr.shape)


def _clipped_root(fn, target, model, lo, hi) -> float:
    """Root of a monotone map restricted to the model's workable bracket."""
    try:
        return monotone_root(fn, target, float(lo), float(hi),
                             xtol=1e-13 * model.scale, expand=False)
    except RangeError:
        raise RangeError(
            f"target {target!r} outside the invertible range on "
            f"[{float(lo)!r}, {float(hi)!r}]") from None


def check_log_concavity(model: DensityModel, grid=None) -> ConcavityReport:
    """Second-difference log-concavity certificate of f on a uniform grid.

    The slack is 1e-10 * step^2: strictly below the discrete curvature any
    genuinely convex kink produces, but above rounding noise.
    """
    if grid is None:
        grid = model.default_grid()
    grid = as_float_array(grid, "grid")
    if grid.ndim != 1 or grid.size < 3:
        raise ValidationError("concavity grid needs at least 3 points")
    h = require_uniform(grid, "grid")
    values = np.atleast_1d(model.log_pdf(grid))
    d2 = second_differences(values)
    slack = 1e-10 * h * h
    idx = int(np.argmax(d2))
    max_violation = float(d2[idx])
    if max_violation <= slack:
        return ConcavityReport(True, None, max_violation)
    witness = (float(grid[idx]), float(grid[idx + 1]), float(grid[idx + 2]))
    return ConcavityReport(False, witness, max_violation)
