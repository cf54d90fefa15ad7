from __future__ import annotations
import argparse
import logging

from .. import config
from ..errors import ValidationError
from ..solver import empirical_threshold, regular_sat_curve, sat_probability_curve, transition_width
from ..thresholds import CSV_HEADER, bound_sweep, report
from .base import Command, add_out, add_resume, checkpoint_for, emit_csv, emit_json, float_list, int_range

log = logging.getLogger("ksat-lab.cli")

CURVE_HEADER = ["x", "fraction", "stderr", "sat", "unsat", "unknown", "m"]


class BoundsCommand(Command):
    name = "bounds"
    help = "closed-form threshold bounds for one k or a sweep"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        which = p.add_mutually_exclusive_group(required=True)
        which.add_argument("--k", type=int)
        which.add_argument("--ks", type=int_range, help="'lo:hi' sweep, written as CSV rows")
        p.add_argument("--with-regular", action="store_true", help="also scan Xi(k, d) for the regular d*")
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        if args.k is not None:
            table = report(args.k, with_regular=args.with_regular)
            emit_json(args, table.to_dict())
            emit_csv(args, CSV_HEADER, [table.row()])
            return 0
        tables = bound_sweep(args.ks, with_regular=args.with_regular)
        emit_json(args, {"bounds": tables})
        emit_csv(args, CSV_HEADER, [t.row() for t in tables])
        return 0


class EmpiricalCommand(Command):
    name = "empirical"
    help = "Monte Carlo satisfiability: bisection for the uniform threshold, or curves over r or regular d"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--r-lo", type=float, default=None)
        p.add_argument("--r-hi", type=float, default=None)
        p.add_argument("--tol", type=float, default=0.05, help="bisection stops at this bracket width")
        p.add_argument("--curve", type=float_list, default=None, metavar="RS",
                       help="densities for a satisfiability curve instead of bisection")
        p.add_argument("--regular", type=int_range, default=None, metavar="DS",
                       help="degrees for a regular-model curve instead of bisection")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timeout", type=float, default=None, help="per-instance DPLL timeout in seconds")
        add_resume(p)
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        timeout = args.timeout if args.timeout is not None else (config.DPLL_TIMEOUT or None)
        if args.regular is not None:
            pts = regular_sat_curve(args.k, args.n, args.regular, args.trials, args.seed, timeout)
            emit_json(args, {"regular_curve": [dict(e.to_dict(), d=d) for d, e in pts]})
            emit_csv(args, CURVE_HEADER, [[d, e.fraction, e.stderr, e.sat, e.unsat, e.unknown, e.m]
                                          for d, e in pts])
            return 0
        if args.curve is not None:
            curve = sat_probability_curve(args.k, args.n, args.curve, args.trials, args.seed, timeout)
            emit_json(args, {"curve": curve, "transition_width": transition_width(curve)})
            emit_csv(args, CURVE_HEADER, [[e.r, e.fraction, e.stderr, e.sat, e.unsat, e.unknown, e.m]
                                          for e in curve])
            return 0
        if args.r_lo is None or args.r_hi is None:
            raise ValidationError("bisection needs --r-lo and --r-hi (or use --curve / --regular)")
        cp = checkpoint_for(args, {"k": args.k, "n": args.n, "trials": args.trials, "seed": args.seed,
                                   "r_lo": args.r_lo, "r_hi": args.r_hi, "tol": args.tol, "timeout": timeout})
        est = empirical_threshold(args.k, args.n, args.trials, args.r_lo, args.r_hi, args.tol,
                                  seed=args.seed, timeout=timeout, checkpoint=cp)
        log.info("k=%d n=%d: threshold estimate %.4f", args.k, args.n, est.estimate)
        emit_json(args, {"threshold": est})
        emit_csv(args, CURVE_HEADER, [[e.r, e.fraction, e.stderr, e.sat, e.unsat, e.unknown, e.m]
                                      for e in sorted(est.curve, key=lambda e: e.r)])
        return 0
