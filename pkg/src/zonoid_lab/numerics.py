"""Shared numeric building blocks: bracketing, golden-section, stencils, grids.

These helpers are deliberately dumb about what they optimise; all of the
domain knowledge (call curves, boundaries, densities) lives in the modules
that call them.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np
from scipy import optimize

from .errors import DomainError, RangeError, ValidationError

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INVPHI2 = 1.0 - _INVPHI              # 1/phi^2


def as_float_array(x, name: str = "x") -> np.ndarray:
    """Coerce to a float64 ndarray and reject non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def monotone_root(
    fn: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-13,
    expand: bool = True,
    max_expand: int = 200,
) -> float:
    """Solve fn(x) = target for a monotone fn, expanding the bracket if needed.

    The bracket [lo, hi] is widened geometrically until the residual changes
    sign; a RangeError is raised when the target is not attained within the
    expansion budget (target outside the closure of fn's range).
    """
    g = lambda x: fn(x) - target
    glo, ghi = g(lo), g(hi)
    width = hi - lo
    n = 0
    while glo * ghi > 0.0:
        if not expand or n >= max_expand:
            raise RangeError(
                f"target {target!r} not bracketed by [{lo!r}, {hi!r}]")
        width *= 2.0
        if abs(glo) < abs(ghi):
            lo -= width
            glo = g(lo)
        else:
            hi += width
            ghi = g(hi)
        n += 1
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    return float(optimize.brentq(g, lo, hi, xtol=xtol, rtol=8.9e-16, maxiter=300))


def golden_section_min(
    fn: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    *,
    iters: int = 70,
    refine: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised golden-section minimisation over [lo, hi] per component.

    `fn` must accept and return arrays of the bracket shape.  Returns
    (argmin, min_value).  A single parabolic refinement step is applied to the
    final bracket, which helps when the bracket is still wide.
    """
    a = np.array(lo, dtype=np.float64, copy=True, ndmin=1)
    b = np.array(hi, dtype=np.float64, copy=True, ndmin=1)
    scalar = np.isscalar(lo) and np.isscalar(hi)
    c = a + _INVPHI2 * (b - a)
    d = a + _INVPHI * (b - a)
    fc = np.asarray(fn(c), dtype=np.float64)
    fd = np.asarray(fn(d), dtype=np.float64)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c = a + _INVPHI2 * (b - a)
        d = a + _INVPHI * (b - a)
        fc = np.asarray(fn(c), dtype=np.float64)
        fd = np.asarray(fn(d), dtype=np.float64)
    x = np.where(fc < fd, c, d)
    fx = np.minimum(fc, fd)
    if refine:
        x2, f2 = _parabolic_step(fn, a, x, b, fx)
        better = f2 < fx
        x = np.where(better, x2, x)
        fx = np.minimum(fx, f2)
    if scalar:
        return float(x[0]), float(fx[0])
    return x, fx


def _parabolic_step(fn, a, m, b, fm):
    """One parabolic interpolation through (a, m, b); clipped to the bracket."""
    fa = np.asarray(fn(a), dtype=np.float64)
    fb = np.asarray(fn(b), dtype=np.float64)
    num = (m - a) ** 2 * (fm - fb) - (m - b) ** 2 * (fm - fa)
    den = (m - a) * (fm - fb) - (m - b) * (fm - fa)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(np.abs(den) > 0.0, num / (2.0 * den), 0.0)
    x = np.clip(m - step, np.minimum(a, b), np.maximum(a, b))
    x = np.where(np.isfinite(x), x, m)
    return x, np.asarray(fn(x), dtype=np.float64)


def second_differences(values: np.ndarray) -> np.ndarray:
    """Plain second differences v[i-1] - 2 v[i] + v[i+1] of a 1-d array."""
    v = np.asarray(values, dtype=np.float64)
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def require_uniform(grid: np.ndarray, name: str = "grid") -> float:
    """Validate a strictly increasing, uniformly spaced grid; return the step."""
    g = as_float_array(grid, name)
    if g.ndim != 1 or g.size < 2:
        raise ValidationError(f"{name} must be 1-d with at least 2 points")
    steps = np.diff(g)
    if np.any(steps <= 0.0):
        raise ValidationError(f"{name} must be strictly increasing")
    h = float(steps[0])
    if np.max(np.abs(steps - h)) > 1e-9 * max(h, 1.0):
        raise ValidationError(f"{name} must be uniformly spaced")
    return h


def central_d1(values: np.ndarray, idx: int, h: float) -> float:
    """First derivative by central differences, Richardson-extrapolated when
    two nodes of margin are available on both sides."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if idx < 1 or idx > n - 2:
        raise DomainError("need at least one interior node on each side")
    d_h = (v[idx + 1] - v[idx - 1]) / (2.0 * h)
    if idx < 2 or idx > n - 3:
        return float(d_h)
    d_2h = (v[idx + 2] - v[idx - 2]) / (4.0 * h)
    return float((4.0 * d_h - d_2h) / 3.0)


def central_d2(values: np.ndarray, idx: int, h: float) -> float:
    """Second derivative by central differences, Richardson-extrapolated when
    two nodes of margin are available on both sides."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if idx < 1 or idx > n - 2:
        raise DomainError("need at least one interior node on each side")
    d_h = (v[idx + 1] - 2.0 * v[idx] + v[idx - 1]) / (h * h)
    if idx < 2 or idx > n - 3:
        return float(d_h)
    d_2h = (v[idx + 2] - 2.0 * v[idx] + v[idx - 2]) / (4.0 * h * h)
    return float((4.0 * d_h - d_2h) / 3.0)


def parse_grid(spec: str) -> np.ndarray:
    """Parse a "lo:hi:count" string into a strictly increasing linspace."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid spec must be lo:hi:count, got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad grid spec {spec!r}: {exc}") from exc
    if count < 2:
        raise ValidationError("grid needs at least 2 points")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValidationError(f"grid bounds must satisfy lo < hi, got {spec!r}")
    return np.linspace(lo, hi, count)
