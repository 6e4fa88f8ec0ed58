"""
Command-line interface.

    mosqdyn simulate      orbit of W0 (or W with --raw) as CSV/JSON
    mosqdyn fixed-points  fixed points of W0 with eigenvalues and type
    mosqdyn normalized    analyses of the one-dimensional map T
    mosqdyn sweep         regime table over a parameter grid

Every successful run prints one output envelope with keys schema_version,
command, params and payload. In CSV mode the envelope (minus the table) is
written as a single leading ``#`` comment line, followed by the table.

Exit codes: 0 success, 2 invalid input, 3 undetermined (no convergence
within the iteration budget, overridable with MOSQ_DYN_MAX_ITER).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from decimal import Decimal, InvalidOperation
from dataclasses import replace
from pathlib import Path

from . import harness, simplex, spectral
from .core import ModelParams, State2, iterate_w, iterate_w0, step_w0, validate_params
from .errors import InvalidParams, MaxIterExceeded, ModelError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_UNDETERMINED = 0, 2, 3
DEFAULT_MAX_ITER = 100_000


class UsageError(Exception):
    pass


def default_max_iter() -> int:
    raw = os.environ.get("MOSQ_DYN_MAX_ITER")
    if raw is None:
        return DEFAULT_MAX_ITER
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"MOSQ_DYN_MAX_ITER must be an integer, got {raw!r}")
    if val < 1:
        raise UsageError("MOSQ_DYN_MAX_ITER must be >= 1")
    return val


def fmt(v) -> str:
    """Shortest round-trip text for floats; '.' separator, locale independent."""
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def envelope(command: str, params, payload) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "payload": payload,
    }


def write_csv(out, header, rows, meta: dict | None = None) -> None:
    if meta is not None:
        out.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def emit(out, env: dict, fmt_: str, table=None) -> None:
    """Print an envelope. ``table`` is (header, rows, payload_key) for CSV output."""
    if fmt_ == "csv" and table is not None:
        header, rows, key = table
        meta = dict(env)
        meta["payload"] = {k: v for k, v in env["payload"].items() if k != key}
        write_csv(out, header, rows, meta)
    else:
        out.write(json.dumps(env, sort_keys=True) + "\n")


def _params_from(args, require_lemma1=True) -> ModelParams:
    p = validate_params(args.alpha, args.beta, args.mu, args.d0, getattr(args, "d1", 0.0))
    if require_lemma1 and not p.lemma1_valid:
        raise InvalidParams(p.lemma1_violations)
    return p


# --- commands ------------------------------------------------------------


def cmd_simulate(args, out) -> int:
    p = _params_from(args, require_lemma1=not args.raw)
    s0 = State2(args.x0, args.y0)
    steps = args.steps if args.steps is not None else default_max_iter()
    if args.raw:
        traj = iterate_w(s0, p, steps, args.tol)
    elif step_w0(s0, p) == s0:
        # already fixed: report the single state rather than a repeated row
        traj = iterate_w0(s0, p, 1, args.tol)
        traj = replace(traj, xy=traj.xy[:1], converged=s0, iterations=0)
    else:
        traj = iterate_w0(s0, p, steps, args.tol)
    rows = [(n + traj.start_index, float(x), float(y)) for n, (x, y) in enumerate(traj.xy)]
    payload = {
        "converged": traj.converged is not None,
        "limit": traj.converged.to_dict() if traj.converged is not None else None,
        "iterations": traj.iterations,
        "tol": args.tol,
        "left_quadrant_at": traj.left_quadrant_at,
        "rows": [list(r) for r in rows],
    }
    emit(out, envelope("simulate", p.to_dict(), payload), args.format, (["n", "x", "y"], rows, "rows"))
    return EXIT_OK if traj.converged is not None else EXIT_UNDETERMINED


def cmd_fixed_points(args, out) -> int:
    p = _params_from(args)
    reports = spectral.fixed_point_reports(p, args.nonhyperbolic_tol)
    th = spectral.regime_thresholds(p)
    payload = {
        "thresholds": th.to_dict(),
        "origin_regime": spectral.origin_regime(p).value,
        "fixed_points": [r.to_dict() for r in reports],
    }
    rows = [
        (r.location.x, r.location.y, r.eigenvalues[0].real, r.eigenvalues[0].imag,
         r.eigenvalues[1].real, r.eigenvalues[1].imag, r.moduli[0], r.moduli[1],
         r.stability.value, th.t1, th.t2)
        for r in reports
    ]
    header = ["x", "y", "ev1_re", "ev1_im", "ev2_re", "ev2_im", "mod1", "mod2", "stability", "t1", "t2"]
    emit(out, envelope("fixed-points", p.to_dict(), payload), args.format, (header, rows, "fixed_points"))
    return EXIT_OK


def cmd_normalized(args, out) -> int:
    p = _params_from(args)
    code = EXIT_OK
    table = None
    if args.mode == "orbit":
        if not 0.0 <= args.x0 <= 1.0:
            raise UsageError("--x0 must lie in [0, 1] for the normalized map")
        steps = args.steps if args.steps is not None else default_max_iter()
        xs = [args.x0]
        x = args.x0
        xstar = simplex.t_fixed_point(p)
        converged = False
        for _ in range(steps):
            nx = float(simplex.t_map(x, p))
            xs.append(nx)
            if abs(nx - x) < args.tol and abs(nx - xstar) < 10 * args.tol:
                converged = True
                break
            x = nx
        rows = [(n, v, float(simplex.t_map(v, p))) for n, v in enumerate(xs)]
        payload = {"converged": converged, "fixed_point": xstar, "limit": xs[-1] if converged else None,
                   "rows": [list(r) for r in rows]}
        table = (["n", "x", "T(x)"], rows, "rows")
        code = EXIT_OK if converged else EXIT_UNDETERMINED
    elif args.mode == "fixed-point":
        xstar = simplex.t_fixed_point(p)
        coeffs = simplex.fixed_point_cubic(p)
        payload = {
            "x_star": xstar,
            "multiplier": simplex.t_fixed_point_stability(p),
            "cubic": list(coeffs),
            "cubic_residual": abs(simplex._cubic(coeffs, xstar)),
            "budan_fourier": {
                "N0": simplex.budan_fourier_variations(coeffs, 0.0),
                "N1": simplex.budan_fourier_variations(coeffs, 1.0),
            },
        }
        if coeffs[0] != 0:
            z = simplex.cardano_fixed_point(p)
            payload["cardano_cross_check"] = {"re": z.real, "im": z.imag,
                                              "abs_diff": abs(z - xstar)}
    elif args.mode == "profile":
        payload = simplex.t_monotonicity_profile(p).to_dict()
    elif args.mode == "period2":
        payload = simplex.period2_certificate(p).to_dict()
        payload["grid_min_gap"] = simplex.two_cycle_gap(p, args.spacing)
    elif args.mode == "curve":
        n = args.points
        rows = [(i / (n - 1), float(simplex.t_map(i / (n - 1), p))) for i in range(n)]
        payload = {"rows": [list(r) for r in rows]}
        table = (["x", "T(x)"], rows, "rows")
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(args.mode)
    payload = {"mode": args.mode, **payload}
    emit(out, envelope("normalized", p.to_dict(), payload), args.format, table)
    return code


def parse_axis(text: str) -> list[float]:
    """'v', 'v1,v2,...' or 'start:stop:step' (stop inclusive, decimal-exact steps)."""
    try:
        if ":" in text:
            start, stop, step = (Decimal(t) for t in text.split(":"))
            if step <= 0:
                raise UsageError(f"step must be positive in {text!r}")
            vals = []
            v = start
            while v <= stop:
                vals.append(float(v))
                v += step
            return vals
        return [float(Decimal(t)) for t in text.split(",") if t.strip()]
    except (InvalidOperation, ValueError):
        raise UsageError(f"cannot parse range {text!r}")


SWEEP_COLUMNS = ["alpha", "beta", "mu", "d0", "regime", "verdict", "iterations", "observation", "error"]


def sweep_table(rows) -> list[tuple]:
    return [(r.alpha, r.beta, r.mu, r.d0, r.regime, r.verdict, r.iterations, r.observation, r.error)
            for r in rows]


def cmd_sweep(args, out) -> int:
    grid = harness.GridSpec(*(parse_axis(getattr(args, k)) for k in ("alpha", "beta", "mu", "d0")))
    steps = args.steps if args.steps is not None else default_max_iter()
    rows = harness.sweep_regimes(grid, State2(args.x0, args.y0), args.tol, steps, args.workers)
    if not rows or all(r.verdict == harness.ERROR for r in rows):
        raise UsageError("no valid cells in the grid")
    summary = harness.summarize(rows)
    grid_echo = {k: list(getattr(grid, k)) for k in ("alpha", "beta", "mu", "d0")}
    payload = {"summary": summary, "cells": len(rows), "rows": [r.to_dict() for r in rows]}
    if args.output:
        path = Path(args.output)
        with open(path, "w", newline="") as fh:
            if args.format == "csv":
                write_csv(fh, SWEEP_COLUMNS, sweep_table(rows))
            else:
                fh.write(json.dumps(payload["rows"], sort_keys=True) + "\n")
        payload["output"] = str(path)
    env = envelope("sweep", grid_echo, payload)
    if args.output:
        out.write(json.dumps(env, sort_keys=True) + "\n")
    else:
        emit(out, env, args.format, (SWEEP_COLUMNS, sweep_table(rows), "rows"))
    print("summary: " + ", ".join(f"{k}={v}" for k, v in sorted(summary.items())), file=sys.stderr)
    return EXIT_OK


# --- parser --------------------------------------------------------------


def _add_params(sp, d1=False):
    for name in ("alpha", "beta", "mu", "d0"):
        sp.add_argument(f"--{name}", type=float, required=True)
    if d1:
        sp.add_argument("--d1", type=float, default=0.0,
                        help="density-dependent larvae death; nonzero only with --raw")
    sp.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mosqdyn", description=__doc__.split("\n\n")[0].strip())
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="iterate W0 from a starting state")
    _add_params(sp, d1=True)
    sp.add_argument("--x0", type=float, required=True)
    sp.add_argument("--y0", type=float, required=True)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--raw", action="store_true",
                    help="iterate the general W (any d1), stopping if the state leaves the quadrant")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fixed-points", help="fixed points of W0 and their type")
    _add_params(sp)
    sp.add_argument("--nonhyperbolic-tol", type=float, default=spectral.NONHYPERBOLIC_TOL)
    sp.set_defaults(func=cmd_fixed_points)

    sp = sub.add_parser("normalized", help="the one-dimensional normalized map T")
    _add_params(sp)
    sp.add_argument("--mode", choices=("orbit", "fixed-point", "profile", "period2", "curve"),
                    default="fixed-point")
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--spacing", type=float, default=1e-5)
    sp.add_argument("--points", type=int, default=201)
    sp.set_defaults(func=cmd_normalized)

    sp = sub.add_parser("sweep", help="regime table over a grid of (alpha, beta, mu, d0)")
    for name in ("alpha", "beta", "mu", "d0"):
        sp.add_argument(f"--{name}", required=True, help="value, list a,b,c or start:stop:step")
    sp.add_argument("--x0", type=float, default=0.002)
    sp.add_argument("--y0", type=float, default=0.2)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--output", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="csv")
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except InvalidParams as exc:
        print("invalid parameters: violates " + ", ".join(exc.violations), file=sys.stderr)
    except MaxIterExceeded as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (ModelError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INVALID


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
