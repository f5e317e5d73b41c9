"""Batch command-line front door.

Every subcommand is a thin adapter over the library: it parses flags, calls
the same functions a Python caller would, and writes CSV or JSON artifacts.
Exit codes: 0 success, 1 usage error (bad flags), 2 validation failure
(domain errors, failed certificates, failed checks).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import curve_io
from .densities import DensityModel, check_log_concavity
from .errors import ValidationError, ZonoidLabError
from .implied import ImpliedQuery, implied_y_minimization, implied_y_root
from .localvol import (dupire_from_boundary, dupire_from_calls,
                       localvol_geometric_closed, localvol_linear_closed)
from .mc import SimConfig, _estimate, mc_check_propositions, simulate_terminal
from .numerics import parse_grid
from .peacocks import (G_map, H_map, PeacockSpec, TimeChange, boundary_surface,
                       call_surface, certify_peacock, recover_F_from_G,
                       recover_F_from_H)
from .pricing import (ModelParams, bachelier_call, black_scholes_call,
                      bachelier_curve, black_scholes_curve,
                      family_call_geometric, family_call_linear,
                      geometric_family_curve, linear_family_curve, survival)
from .zonoid import (CallCurve, DiscreteDistribution, ZonoidBoundary,
                     calls_from_upper_boundary, upper_boundary_from_calls)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting so main() can map
    usage problems to exit code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _density_type(text: str) -> DensityModel:
    try:
        return DensityModel.from_spec(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad density spec {text!r}: {exc}")


def _grid_type(text: str) -> np.ndarray:
    try:
        return parse_grid(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}")


def _table_type(text: str):
    """``t:v,t:v,...`` pairs for tabulated time changes."""
    try:
        pairs = [tuple(float(v) for v in chunk.split(":")) for chunk in text.split(",")]
        if any(len(p) != 2 for p in pairs):
            raise ValueError("each entry must be t:value")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad table {text!r}: {exc}")
    return pairs


def _floats_type(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}: {exc}")


def _out_handle(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit_table(path: str, header, *columns) -> None:
    fh, owned = _out_handle(path)
    try:
        curve_io.write_table(fh, header, *columns)
    finally:
        if owned:
            fh.close()


def _emit_json(path: str, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _emit_curve(path: str, obj, fmt: str) -> None:
    fh, owned = _out_handle(path)
    try:
        if fmt == "json":
            curve_io.write_curve_json(fh, obj)
        else:
            curve_io.write_curve_csv(fh, obj)
    finally:
        if owned:
            fh.close()


def _time_change(args) -> TimeChange:
    if args.y_kind == "sqrt":
        return TimeChange.sqrt(args.y_scale)
    if args.y_kind == "linear":
        return TimeChange.linear(args.y_scale)
    if args.y_table is None:
        raise ValidationError("--y-table is required when --y-kind table")
    times = [p[0] for p in args.y_table]
    values = [p[1] for p in args.y_table]
    return TimeChange.from_table(times, values)


def _add_time_change_flags(sp) -> None:
    sp.add_argument("--y-kind", choices=["sqrt", "linear", "table"], default="sqrt",
                    help="time change family (default sqrt)")
    sp.add_argument("--y-scale", type=float, default=1.0,
                    help="scale of the sqrt/linear time change")
    sp.add_argument("--y-table", type=_table_type, default=None,
                    help="tabulated time change as t:v,t:v,...")


def _collect_strikes(args, parser, flag="strike") -> np.ndarray:
    vals = list(args.k or [])
    if getattr(args, "k_grid", None) is not None:
        vals.extend(args.k_grid.tolist())
    if not vals:
        parser.error(f"at least one {flag} is required (--k or --k-grid)")
    return np.array(vals, dtype=np.float64)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_price(args, parser) -> int:
    strikes = _collect_strikes(args, parser)
    if (args.model is None) == (args.family is None):
        parser.error("exactly one of --model or --family is required")
    t, sigma, s0 = args.t, args.sigma, args.s0
    yval = sigma * math.sqrt(t)
    if args.model is not None:
        density = DensityModel.gaussian()
        kind = "linear" if args.model == "bachelier" else "geometric"
        params = ModelParams(s0, sigma, t)
        price_fn = bachelier_call if args.model == "bachelier" else black_scholes_call
        prices = np.array([price_fn(params, k) for k in strikes])
    else:
        density = args.density
        kind = args.family
        call_fn = family_call_linear if kind == "linear" else family_call_geometric
        if yval > 0.0:
            prices = np.array([call_fn(density, s0, yval, k) for k in strikes])
    if yval == 0.0:
        prices = np.maximum(s0 - strikes, 0.0)
        surv = (strikes < s0).astype(np.float64)
    else:
        surv = np.array([survival(kind, density, s0, yval, k) for k in strikes])
    _emit_table(args.out, ("K", "C", "survival"), strikes, prices, surv)
    return 0


def _build_call_curve(args, parser) -> CallCurve:
    sources = [args.calls is not None, args.model is not None,
               args.family is not None, args.atoms is not None]
    if sum(sources) != 1:
        parser.error("exactly one of --calls, --model, --family, --atoms is required")
    if args.calls is not None:
        curve = curve_io.read_curve_csv(args.calls, mean=args.mean,
                                        positive=args.positive)
        if not isinstance(curve, CallCurve):
            raise ValidationError("--calls file must have header K,C")
        return curve
    if args.atoms is not None:
        if args.weights is None:
            parser.error("--atoms requires --weights")
        dist = DiscreteDistribution(args.atoms, args.weights)
        return dist.call_curve()
    yval = args.sigma * math.sqrt(args.t)
    if args.model == "bachelier":
        return bachelier_curve(ModelParams(args.s0, args.sigma, args.t))
    if args.model == "black_scholes":
        return black_scholes_curve(ModelParams(args.s0, args.sigma, args.t))
    if args.family == "linear":
        return linear_family_curve(args.density, args.s0, yval)
    return geometric_family_curve(args.density, args.s0, yval)


def _cmd_boundary(args, parser) -> int:
    curve = _build_call_curve(args, parser)
    boundary = upper_boundary_from_calls(curve, args.p_grid)
    _emit_curve(args.out, boundary, args.format)
    return 0


def _cmd_calls(args, parser) -> int:
    boundary = curve_io.read_curve_csv(args.boundary, mean=args.mean)
    if not isinstance(boundary, ZonoidBoundary):
        raise ValidationError("--boundary file must have header p,Chat")
    curve = calls_from_upper_boundary(boundary, args.k_grid)
    _emit_curve(args.out, curve, args.format)
    return 0


def _cmd_surface(args, parser) -> int:
    spec = PeacockSpec(args.family, args.density, args.s, _time_change(args))
    if args.space == "zonoid":
        grid = boundary_surface(spec, args.t_grid, args.p_grid)
    else:
        if args.k_grid is None:
            parser.error("--k-grid is required for --space call")
        grid = call_surface(spec, args.t_grid, args.k_grid)
    if args.out == "-":
        sys.stdout.write(curve_io.surface_to_string(grid))
    else:
        curve_io.write_surface_csv(args.out, grid)
    return 0


def _cmd_certify(args, parser) -> int:
    spec = PeacockSpec(args.family, args.density, args.s, _time_change(args))
    pgrid = args.p_grid if args.p_grid is not None else None
    cert = certify_peacock(spec, args.t_grid, pgrid)
    _emit_json(args.out, cert.to_dict())
    return 0 if cert.ok else 2


def _cmd_implied(args, parser) -> int:
    query = ImpliedQuery(args.density, args.c, args.k)
    if args.method == "root":
        y_star, p_hat = implied_y_root(query), None
    else:
        y_star, p_hat = implied_y_minimization(query)
        if p_hat is not None and math.isnan(p_hat):
            p_hat = None
    _emit_json(args.out, {"y_star": y_star, "p_hat": p_hat, "method": args.method})
    return 0


def _cmd_localvol(args, parser) -> int:
    density, family, s0 = args.density, args.family, args.s0
    if args.sigma is not None:
        args.y_scale = args.sigma  # --sigma names the sqrt/linear scale
    tc = _time_change(args)
    rows = []
    if args.source == "closed":
        strikes = _collect_strikes(args, parser)
        for t in args.t:
            for k in strikes:
                if family == "linear":
                    res = localvol_linear_closed(density, tc, s0, t, k)
                else:
                    res = localvol_geometric_closed(density, tc, s0, t, k)
                rows.append((t, k, res.sigma_sq, res.method))
    elif args.source == "calls":
        strikes = _collect_strikes(args, parser)
        spec = PeacockSpec(family, density, s0, tc)
        for t in args.t:
            tgrid = t + args.h_t * np.arange(-2.0, 3.0)
            for k in strikes:
                h_k = args.h_k * max(1.0, abs(k))
                kgrid = k + h_k * np.arange(-2.0, 3.0)
                surf = call_surface(spec, tgrid, kgrid)
                res = dupire_from_calls(surf, t, k)
                rows.append((t, k, res.sigma_sq, res.method))
    else:
        if not args.p:
            parser.error("--from boundary requires --p")
        spec = PeacockSpec(family, density, s0, tc)
        for t in args.t:
            tgrid = t + args.h_t * np.arange(-2.0, 3.0)
            for p in args.p:
                pgrid = p + args.h_p * np.arange(-2.0, 3.0)
                surf = boundary_surface(spec, tgrid, pgrid)
                res = dupire_from_boundary(surf, t, p)
                rows.append((t, res.strike, res.sigma_sq, res.method))
    fh, owned = _out_handle(args.out)
    try:
        fh.write("t,K,sigma_sq,method\n")
        for t, k, sig, method in rows:
            fh.write("%s,%s,%s,%s\n" % (curve_io.format_float(t),
                                        curve_io.format_float(k),
                                        curve_io.format_float(sig), method))
    finally:
        if owned:
            fh.close()
    return 0


def _cmd_simulate(args, parser) -> int:
    config = SimConfig(args.model, args.t, args.n, args.seed,
                       antithetic=args.antithetic)
    if args.report:
        report = mc_check_propositions(config, pgrid=args.p_grid)
        _emit_json(args.out, report.to_dict())
        return 0 if report.ok else 2
    if args.k_grid is None:
        parser.error("--k-grid is required unless --report is given")
    sample = simulate_terminal(config)
    values, errors = [], []
    for k in args.k_grid:
        value, se, _ = _estimate(np.maximum(sample - k, 0.0), config.antithetic)
        values.append(value)
        errors.append(se)
    _emit_table(args.out, ("K", "mc_value", "std_error"),
                args.k_grid, values, errors)
    return 0


def _cmd_recover(args, parser) -> int:
    density = args.density
    anchor = args.anchor
    if anchor is None:
        anchor = float(density.quantile(args.p0))
    if args.mode == "g":
        ps, xs = recover_F_from_G(lambda p: G_map(density, p), anchor,
                                  args.p0, args.p_grid)
        _emit_table(args.out, ("p", "x"), ps, xs)
    else:
        if not args.x:
            parser.error("--mode h requires --x")
        xs = np.array(args.x, dtype=np.float64)
        probs = [recover_F_from_H(lambda y, p: H_map(density, y, p),
                                  anchor, args.p0, x) for x in xs]
        _emit_table(args.out, ("x", "F"), xs, probs)
    return 0


def _cmd_density_check(args, parser) -> int:
    report = check_log_concavity(args.density)
    payload = {"is_concave": report.is_concave,
               "witness": list(report.witness) if report.witness else None,
               "max_violation": report.max_violation}
    _emit_json(args.out, payload)
    return 0 if report.is_concave else 2


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="zonoid-lab",
                     description="Call curves, zonoid boundaries, and their transforms.")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", default="-", help="output path (default stdout)")
        return sp

    sp = add("price", _cmd_price, "call prices and survival probabilities")
    sp.add_argument("--model", choices=["bachelier", "black_scholes"])
    sp.add_argument("--family", choices=["linear", "geometric"])
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--s0", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--k", type=float, action="append",
                    help="strike; repeatable")
    sp.add_argument("--k-grid", type=_grid_type, default=None,
                    help="strike grid lo:hi:steps")

    for name, fn, txt in (("boundary", _cmd_boundary,
                           "zonoid upper boundary from calls/model/atoms"),):
        sp = add(name, fn, txt)
        sp.add_argument("--calls", help="CSV with header K,C")
        sp.add_argument("--mean", type=float, default=None)
        sp.add_argument("--positive", action="store_true",
                        help="mark the loaded curve as positive-support")
        sp.add_argument("--model", choices=["bachelier", "black_scholes"])
        sp.add_argument("--family", choices=["linear", "geometric"])
        sp.add_argument("--density", type=_density_type,
                        default=DensityModel.gaussian())
        sp.add_argument("--s0", type=float, default=1.0)
        sp.add_argument("--sigma", type=float, default=1.0)
        sp.add_argument("--t", type=float, default=1.0)
        sp.add_argument("--atoms", type=_floats_type, default=None)
        sp.add_argument("--weights", type=_floats_type, default=None)
        sp.add_argument("--p-grid", type=_grid_type, default=parse_grid("0:1:2001"))
        sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = add("calls", _cmd_calls, "call curve recovered from a boundary CSV")
    sp.add_argument("--boundary", required=True, help="CSV with header p,Chat")
    sp.add_argument("--mean", type=float, default=None)
    sp.add_argument("--k-grid", type=_grid_type, required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = add("surface", _cmd_surface, "boundary or call surface over (t, axis)")
    sp.add_argument("--family", choices=["linear", "geometric"], required=True)
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--s", type=float, default=1.0)
    _add_time_change_flags(sp)
    sp.add_argument("--t-grid", type=_grid_type, required=True)
    sp.add_argument("--space", choices=["zonoid", "call"], default="zonoid")
    sp.add_argument("--p-grid", type=_grid_type, default=parse_grid("0:1:201"))
    sp.add_argument("--k-grid", type=_grid_type, default=None)

    sp = add("certify", _cmd_certify, "peacock certificate for a surface spec")
    sp.add_argument("--family", choices=["linear", "geometric"], required=True)
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--s", type=float, default=1.0)
    _add_time_change_flags(sp)
    sp.add_argument("--t-grid", type=_grid_type, default=parse_grid("0.25:4:16"))
    sp.add_argument("--p-grid", type=_grid_type, default=None)

    sp = add("implied", _cmd_implied, "generalized implied volatility")
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--method", choices=["root", "min"], default="root")

    sp = add("localvol", _cmd_localvol, "local variance by Dupire or closed form")
    sp.add_argument("--from", dest="source", choices=["calls", "boundary", "closed"],
                    required=True)
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--family", choices=["linear", "geometric"], required=True)
    sp.add_argument("--s0", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=None,
                    help="scale of the sqrt/linear time change (alias of --y-scale)")
    _add_time_change_flags(sp)
    sp.add_argument("--t", type=float, action="append", required=True,
                    help="evaluation time; repeatable")
    sp.add_argument("--k", type=float, action="append")
    sp.add_argument("--k-grid", type=_grid_type, default=None)
    sp.add_argument("--p", type=float, action="append",
                    help="probability level for --from boundary; repeatable")
    sp.add_argument("--h-t", type=float, default=1e-3)
    sp.add_argument("--h-k", type=float, default=1e-3)
    sp.add_argument("--h-p", type=float, default=1e-3)

    sp = add("simulate", _cmd_simulate, "Monte Carlo prices or pipeline-check report")
    sp.add_argument("--model", choices=["bachelier", "black_scholes"],
                    required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--antithetic", action="store_true")
    sp.add_argument("--k-grid", type=_grid_type, default=None)
    sp.add_argument("--report", action="store_true",
                    help="emit the JSON proposition-check report instead of prices")
    sp.add_argument("--p-grid", type=_grid_type, default=None)

    sp = add("recover", _cmd_recover, "reconstruct F from its generator or group")
    sp.add_argument("--mode", choices=["g", "h"], default="g")
    sp.add_argument("--density", type=_density_type,
                    default=DensityModel.gaussian())
    sp.add_argument("--p0", type=float, default=0.5)
    sp.add_argument("--anchor", type=float, default=None,
                    help="x with F(x)=p0 (default: quantile(p0))")
    sp.add_argument("--p-grid", type=_grid_type, default=None)
    sp.add_argument("--x", type=float, action="append",
                    help="evaluation point for --mode h; repeatable")

    sp = add("density-check", _cmd_density_check, "log-concavity certificate")
    sp.add_argument("--density", type=_density_type, required=True)

    return parser


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "fn", None) is None:
        parser.error("a subcommand is required")
    return args.fn(args, parser)


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        code = run(argv)
        sys.stdout.flush()
        return code
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return int(code) if isinstance(code, int) else 0
    except ZonoidLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
