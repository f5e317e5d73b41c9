"""Peacock surfaces built from a log-concave density and a time change.

Two families of boundary surfaces over (t, p):

* linear:    boundary(t, p) = s p + Y(t) G(p),   G = f o F^{-1}
* geometric: boundary(t, p) = s H_{Y(t)}(p),     H_y = F(F^{-1}(.) + y)

Both define families of marginals with constant mean s that increase in the
convex order (a peacock) exactly when f is log-concave; ``certify_peacock``
checks the three defining properties on grids: concavity of each time slice,
call prices non-decreasing in t at fixed strike, and mean constancy.

The maps H_y form a composition group (H_{y1} o H_{y2} = H_{y1+y2}) whose
generator is G; ``group_property_check`` and ``generator_limit_check``
measure both identities.  ``recover_F_from_G`` and ``recover_F_from_H``
rebuild the quantile function / distribution function from the two handles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate

from .densities import ConcavityReport, DensityModel
from .errors import DomainError, UnsupportedError, ValidationError
from .numerics import as_float_array, require_uniform, second_differences
from .zonoid import _max_over_nodes

_FAMILIES = ("linear", "geometric")
_AXIS_KINDS = ("call-space", "zonoid-space")
_P_CLIP = 1e-6          # quadrature cutoff near the 1/G endpoint singularities


# ---------------------------------------------------------------------------
# Time changes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TimeChange:
    """Increasing bijection Y on [0, inf) with Y(0) = 0.

    Kinds: "sqrt" (scale * sqrt(t)), "linear" (scale * t), or "table"
    (monotone node table, linearly interpolated; derivative by centered
    secants at the nodes).
    """

    kind: str
    scale: float = 1.0
    times: Optional[np.ndarray] = None
    table_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("sqrt", "linear", "table"):
            raise ValidationError(f"unknown time change kind {self.kind!r}")
        if self.kind == "table":
            times = as_float_array(self.times, "times")
            vals = as_float_array(self.table_values, "values")
            if times.ndim != 1 or times.size < 2 or times.shape != vals.shape:
                raise ValidationError("time change table needs matching 1-d arrays")
            if np.any(np.diff(times) <= 0.0):
                raise ValidationError("table times must be strictly increasing")
            if times[0] != 0.0:
                raise ValidationError("time change table must start at t = 0")
            dv = np.diff(vals)
            if np.all(dv > 0.0):
                if vals[0] != 0.0:
                    raise ValidationError("increasing time change must have Y(0) = 0")
            elif not np.all(dv < 0.0):
                raise ValidationError("time change table must be strictly monotone")
            # strictly decreasing tables are loadable on purpose: they define
            # invalid families that certify_peacock must be able to reject
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "table_values", vals)
        else:
            if self.times is not None or self.table_values is not None:
                raise ValidationError(f"{self.kind} time change takes no table")
            if not (np.isfinite(self.scale) and self.scale > 0.0):
                raise ValidationError("time change scale must be positive")

    @classmethod
    def sqrt(cls, scale: float = 1.0) -> "TimeChange":
        return cls("sqrt", scale)

    @classmethod
    def linear(cls, scale: float = 1.0) -> "TimeChange":
        return cls("linear", scale)

    @classmethod
    def from_table(cls, times, values) -> "TimeChange":
        return cls("table", 1.0, np.asarray(times, dtype=np.float64),
                   np.asarray(values, dtype=np.float64))

    def value(self, t: float) -> float:
        if not np.isfinite(t) or t < 0.0:
            raise DomainError(f"t must be non-negative, got {t!r}")
        if self.kind == "sqrt":
            return self.scale * math.sqrt(t)
        if self.kind == "linear":
            return self.scale * t
        if t > self.times[-1]:
            raise DomainError(f"t={t!r} beyond the time change table")
        return float(np.interp(t, self.times, self.table_values))

    def derivative(self, t: float) -> float:
        if not np.isfinite(t) or t < 0.0:
            raise DomainError(f"t must be non-negative, got {t!r}")
        if self.kind == "sqrt":
            if t == 0.0:
                raise DomainError("sqrt time change has no derivative at t = 0")
            return 0.5 * self.scale / math.sqrt(t)
        if self.kind == "linear":
            return self.scale
        if t > self.times[-1]:
            raise DomainError(f"t={t!r} beyond the time change table")
        x, v = self.times, self.table_values
        secants = np.empty_like(v)
        secants[1:-1] = (v[2:] - v[:-2]) / (x[2:] - x[:-2])
        secants[0] = (v[1] - v[0]) / (x[1] - x[0])
        secants[-1] = (v[-1] - v[-2]) / (x[-1] - x[-2])
        return float(np.interp(t, x, secants))


# ---------------------------------------------------------------------------
# Specs and grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PeacockSpec:
    """A boundary-surface family: density, family kind, mean s, time change."""

    family: str
    density: DensityModel
    s: float
    time_change: TimeChange

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if not np.isfinite(self.s):
            raise ValidationError("s must be finite")
        if self.family == "geometric" and self.s <= 0.0:
            raise ValidationError("geometric family requires s > 0")


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Matrix of surface values over (times, axis), tagged by axis kind:
    "call-space" (axis = strikes) or "zonoid-space" (axis = probabilities)."""

    times: np.ndarray
    axis: np.ndarray
    values: np.ndarray
    axis_kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = as_float_array(self.times, "times")
        axis = as_float_array(self.axis, "axis")
        values = as_float_array(self.values, "values")
        if times.ndim != 1 or np.any(np.diff(times) <= 0.0):
            raise ValidationError("times must be 1-d strictly increasing")
        if axis.ndim != 1 or np.any(np.diff(axis) <= 0.0):
            raise ValidationError("axis must be 1-d strictly increasing")
        if values.shape != (times.size, axis.size):
            raise ValidationError("values must have shape (len(times), len(axis))")
        if self.axis_kind not in _AXIS_KINDS:
            raise ValidationError(f"axis_kind must be one of {_AXIS_KINDS}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "values", values)


# ---------------------------------------------------------------------------
# The two maps and the surfaces
# ---------------------------------------------------------------------------

def G_map(density: DensityModel, p):
    """G(p) = f(F^{-1}(p)), with G(0) = G(1) = 0 by convention."""
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(np.isnan(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise DomainError("p must lie in [0, 1]")
    out = np.zeros(p_arr.shape)
    interior = (p_arr > 0.0) & (p_arr < 1.0)
    if np.any(interior):
        out[interior] = density.pdf(density.quantile(p_arr[interior]))
    if np.ndim(p) == 0:
        return float(out[0])
    return out


def H_map(density: DensityModel, y: float, p):
    """H_y(p) = F(F^{-1}(p) + y) for any real y; H_y(0) = 0 and H_y(1) = 1
    by convention, and H_0 is the identity exactly."""
    if not np.isfinite(y):
        raise DomainError("y must be finite")
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(np.isnan(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise DomainError("p must lie in [0, 1]")
    out = p_arr.copy()
    if y != 0.0:
        interior = (p_arr > 0.0) & (p_arr < 1.0)
        if np.any(interior):
            out[interior] = density.cdf(density.quantile(p_arr[interior]) + y)
    if np.ndim(p) == 0:
        return float(out[0])
    return out


def surface_boundary(spec: PeacockSpec, t: float, p):
    """Upper boundary value of the family at time t: s p + Y(t) G(p) for the
    linear family, s H_{Y(t)}(p) for the geometric one."""
    yval = spec.time_change.value(t)
    if spec.family == "linear":
        out = spec.s * np.asarray(p, dtype=np.float64) + yval * G_map(spec.density, p)
    else:
        out = spec.s * np.asarray(H_map(spec.density, yval, p))
    if np.ndim(p) == 0:
        return float(np.asarray(out).reshape(())[()])
    return out


def boundary_surface(spec: PeacockSpec, tgrid, pgrid) -> SurfaceGrid:
    """Zonoid-space SurfaceGrid of the family over (tgrid, pgrid)."""
    tgrid = as_float_array(tgrid, "tgrid")
    pgrid = as_float_array(pgrid, "pgrid")
    values = np.vstack([np.atleast_1d(surface_boundary(spec, float(t), pgrid))
                        for t in tgrid])
    return SurfaceGrid(tgrid, pgrid, values, "zonoid-space", meta=_spec_meta(spec))


def call_surface(spec: PeacockSpec, tgrid, kgrid) -> SurfaceGrid:
    """Call-space SurfaceGrid of the family over (tgrid, kgrid), using the
    closed-form family prices (intrinsic values where Y(t) = 0)."""
    from .pricing import family_call_geometric, family_call_linear

    tgrid = as_float_array(tgrid, "tgrid")
    kgrid = as_float_array(kgrid, "kgrid")
    rows = []
    for t in tgrid:
        yval = spec.time_change.value(float(t))
        if yval == 0.0:
            rows.append(np.maximum(spec.s - kgrid, 0.0))
        elif spec.family == "linear":
            rows.append(np.atleast_1d(family_call_linear(spec.density, spec.s, yval, kgrid)))
        else:
            rows.append(np.atleast_1d(family_call_geometric(spec.density, spec.s, yval, kgrid)))
    return SurfaceGrid(tgrid, kgrid, np.vstack(rows), "call-space", meta=_spec_meta(spec))


def _spec_meta(spec: PeacockSpec) -> dict:
    meta = {"family": spec.family, "s": spec.s, "mean": spec.s,
            "time_change": spec.time_change.kind}
    try:
        meta["density"] = spec.density.to_spec()
    except UnsupportedError:
        meta["density"] = {"family": "custom"}
    return meta


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KellererReport:
    """Non-decrease of calls in t at every strike of the derived grid."""

    ok: bool
    max_violation: float
    witness: Optional[Tuple[float, float, float]] = None  # (K, t_lo, t_hi)
    skipped: bool = False

    def to_dict(self) -> dict:
        violation = self.max_violation
        return {"ok": self.ok,
                "max_violation": None if math.isnan(violation) else violation,
                "witness": self.witness, "skipped": self.skipped}


@dataclass(frozen=True)
class PeacockCertificate:
    """Joint result of the three peacock checks on grid samples."""

    ok: bool
    concavity: ConcavityReport
    kellerer: KellererReport
    mean_ok: bool
    mean_max_dev: float

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "concavity": {"is_concave": self.concavity.is_concave,
                          "witness": self.concavity.witness,
                          "max_violation": self.concavity.max_violation},
            "kellerer": self.kellerer.to_dict(),
            "mean_ok": self.mean_ok,
            "mean_max_dev": self.mean_max_dev,
        }


def certify_peacock(spec: PeacockSpec, tgrid, pgrid=None,
                    n_strikes: int = 2001) -> PeacockCertificate:
    """Check the three peacock properties of the family on sample grids.

    (a) each time slice p -> boundary(t, p) is concave (second differences
        on the uniform pgrid within slack),
    (b) after transforming every slice to call space on a common strike
        grid, t -> C(t, K) is non-decreasing at each strike (skipped when
        (a) already failed: the transform of a non-concave slice is not a
        faithful representation of it), and
    (c) the mean boundary(t, 1) is exactly constant equal to s.

    pgrid must be uniform and span [0, 1]; defaults to 2001 points.
    """
    tgrid = as_float_array(tgrid, "tgrid")
    if tgrid.ndim != 1 or tgrid.size < 2 or np.any(np.diff(tgrid) <= 0.0):
        raise ValidationError("tgrid must be 1-d strictly increasing")
    if np.any(tgrid < 0.0):
        raise DomainError("times must be non-negative")
    if pgrid is None:
        pgrid = np.linspace(0.0, 1.0, 2001)
    pgrid = as_float_array(pgrid, "pgrid")
    require_uniform(pgrid, "pgrid")
    if pgrid[0] != 0.0 or pgrid[-1] != 1.0:
        raise ValidationError("pgrid must span [0, 1] exactly")

    rows = np.vstack([np.atleast_1d(surface_boundary(spec, float(t), pgrid))
                      for t in tgrid])

    # (a) concavity of each slice
    worst_viol = -np.inf
    worst_witness = None
    for i in range(tgrid.size):
        d2 = second_differences(rows[i])
        j = int(np.argmax(d2))
        viol = float(d2[j])
        if viol > worst_viol:
            worst_viol = viol
            worst_witness = (float(pgrid[j]), float(pgrid[j + 1]), float(pgrid[j + 2]))
    rng = float(rows.max() - rows.min())
    slack = 1e-9 * max(1.0, rng)
    concave_ok = worst_viol <= slack
    concavity = ConcavityReport(True, None, worst_viol) if concave_ok else \
        ConcavityReport(False, worst_witness, worst_viol)

    # (c) mean constancy, exact by the endpoint conventions
    mean_max_dev = float(np.max(np.abs(rows[:, -1] - spec.s)))
    mean_ok = mean_max_dev == 0.0

    # (b) Kellerer monotonicity in t of the transformed calls
    if not concave_ok:
        kellerer = KellererReport(False, np.nan, None, skipped=True)
    else:
        dp = np.diff(pgrid)
        slopes = np.diff(rows, axis=1) / dp
        k_lo, k_hi = float(slopes.min()), float(slopes.max())
        if not k_lo < k_hi:
            k_lo, k_hi = k_lo - max(1.0, abs(spec.s)), k_hi + max(1.0, abs(spec.s))
        kgrid = np.linspace(k_lo, k_hi, n_strikes)
        calls = np.vstack([_max_over_nodes(pgrid, rows[i], kgrid)
                           for i in range(tgrid.size)])
        gaps = np.diff(calls, axis=0)
        i_flat = int(np.argmin(gaps))
        worst_gap = float(gaps.flat[i_flat])
        k_slack = 1e-9 * max(1.0, abs(spec.s))
        mono_ok = worst_gap >= -k_slack
        ti, kj = np.unravel_index(i_flat, gaps.shape)
        witness = None if mono_ok else (float(kgrid[kj]), float(tgrid[ti]),
                                        float(tgrid[ti + 1]))
        kellerer = KellererReport(mono_ok, max(0.0, -worst_gap), witness)

    ok = bool(concave_ok and kellerer.ok and mean_ok)
    return PeacockCertificate(ok, concavity, kellerer, mean_ok, mean_max_dev)


# ---------------------------------------------------------------------------
# Group structure of H and recovery of F
# ---------------------------------------------------------------------------

def group_property_check(density: DensityModel, y1: float, y2: float,
                         pgrid=None) -> float:
    """sup_p |H_{y1+y2}(p) - H_{y1}(H_{y2}(p))| over the grid.

    Negative levels are allowed: H_{-y} is evaluated by the same formula
    F(F^{-1}(p) - y), which is the exact functional inverse of H_y.
    """
    if pgrid is None:
        pgrid = np.linspace(0.01, 0.99, 99)
    pgrid = as_float_array(pgrid, "pgrid")
    composed = H_map(density, y1, H_map(density, y2, pgrid))
    direct = H_map(density, y1 + y2, pgrid)
    return float(np.max(np.abs(composed - direct)))


def generator_limit_check(density: DensityModel, ygrid=None, pgrid=None) -> np.ndarray:
    """Convergence table of sup_p |(H_y(p) - p)/y - G(p)| for y decreasing
    to 0; returns rows (y, sup error)."""
    if ygrid is None:
        ygrid = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    ygrid = as_float_array(ygrid, "ygrid")
    if np.any(ygrid <= 0.0):
        raise DomainError("ygrid must be positive")
    if pgrid is None:
        pgrid = np.linspace(0.01, 0.99, 99)
    pgrid = as_float_array(pgrid, "pgrid")
    g = np.atleast_1d(G_map(density, pgrid))
    rows = []
    for y in ygrid:
        hy = np.atleast_1d(H_map(density, float(y), pgrid))
        err = float(np.max(np.abs((hy - pgrid) / y - g)))
        rows.append((float(y), err))
    return np.array(rows)


def recover_F_from_G(gen: Callable, anchor: float, p0: float,
                     pgrid=None) -> Tuple[np.ndarray, np.ndarray]:
    """Rebuild the quantile function from the generator handle:
    F^{-1}(p) = anchor + int_{p0}^{p} dq / G(q), by adaptive quadrature.

    Probabilities are clipped to [1e-6, 1-1e-6] (1/G is singular at the
    endpoints).  G must be positive on the evaluation range.  Returns the
    (p, quantile) table sorted by p, with p0 included.
    """
    if not (0.0 < p0 < 1.0):
        raise DomainError("p0 must lie in (0, 1)")
    if pgrid is None:
        pgrid = np.linspace(0.01, 0.99, 99)
    pgrid = as_float_array(pgrid, "pgrid")
    ps = np.unique(np.clip(np.append(pgrid, p0), _P_CLIP, 1.0 - _P_CLIP))
    gvals = np.array([float(gen(p)) for p in ps])
    if np.any(gvals <= 0.0):
        raise DomainError("generator must be positive on the evaluation range")
    integrand = lambda q: 1.0 / float(gen(q))
    pieces = np.zeros(ps.size)
    for i in range(ps.size - 1):
        val, _ = integrate.quad(integrand, ps[i], ps[i + 1],
                                epsabs=1e-12, epsrel=1e-10, limit=200)
        pieces[i + 1] = val
    cum = np.cumsum(pieces)
    i0 = int(np.searchsorted(ps, min(p0, ps[-1])))
    xs = anchor + cum - cum[i0]
    return ps, xs


def recover_F_from_H(h_handle: Callable, anchor: float, p0: float, x: float) -> float:
    """Rebuild the distribution function from the flow handle:
    F(x) = H_{x - anchor}(p0), where anchor = F^{-1}(p0).

    Only x >= anchor is supported (negative flow levels are not assumed
    available from the handle)."""
    if not (0.0 < p0 < 1.0):
        raise DomainError("p0 must lie in (0, 1)")
    if not np.isfinite(x):
        raise DomainError("x must be finite")
    if x < anchor:
        raise UnsupportedError("recover_F_from_H needs x >= anchor")
    return float(h_handle(x - anchor, p0))
