from __future__ import annotations
import argparse
import logging
from fractions import Fraction

from ..errors import ValidationError
from ..pruning import prune
from ..sp import (MODE_FULL, MODES, TypeSystem, assign_types, check_ty, check_type_identity, lambda_map,
                  poisson_type_ensemble, regime_ok, regular_type_system, sp_marginal)
from .base import Command, add_out, density, emit_csv, emit_json, int_range, load_formula, need_k

log = logging.getLogger("ksat-lab.cli")


class SpMarginalsCommand(Command):
    name = "sp-marginals"
    help = "SP marginals (p1, p0, p*) over a range of degree differences"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--delta", type=int_range, default=[0], help="'lo:hi' or a comma list of d_x - d_notx")
        p.add_argument("--clause", type=int_range, default=None, metavar="DELTAS",
                       help="also apply the clone map to one clause with these slot deltas (comma list)")
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        rows, points = [], []
        for delta in args.delta:
            if not regime_ok(args.k, delta):
                log.warning("k=%d delta=%d is outside the pruned regime; skipped", args.k, delta)
                continue
            sig = sp_marginal(args.k, delta)
            points.append({"delta": delta, "signature": sig})
            rows.append([delta, float(sig.p1), float(sig.p0), float(sig.pstar),
                         "%s|%s|%s" % (sig.p1, sig.p0, sig.pstar)])
        payload = {"k": args.k, "points": points}
        if args.clause:
            sigs = [sp_marginal(args.k, d) for d in args.clause]
            payload["clause"] = {"deltas": args.clause, "clones": lambda_map(sigs, k=args.k)}
        emit_json(args, payload)
        emit_csv(args, ["delta", "p1", "p0", "pstar", "exact"], rows)
        return 0


def add_type_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dimacs", help="formula (pruned unless --prune is given)")
    src.add_argument("--regular", type=int, metavar="D", help="single-type regular system of degree D")
    src.add_argument("--poisson", action="store_true", help="Poisson degree ensemble at density --r")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--r", type=density, default=None)
    p.add_argument("--prune", action="store_true", help="prune the formula before typing")
    p.add_argument("--mode", choices=MODES, default=MODE_FULL)
    p.add_argument("--samples", type=int, default=None, help="clause-type draws for the ensemble")
    p.add_argument("--seed", type=int, default=0)


def type_system_from(args: argparse.Namespace) -> TypeSystem:
    if args.regular is not None:
        if args.k is None:
            raise ValidationError("--regular needs --k")
        return regular_type_system(args.k, args.regular)
    if args.poisson:
        if args.k is None or args.r is None:
            raise ValidationError("--poisson needs --k and --r")
        return poisson_type_ensemble(args.k, float(args.r), samples=args.samples, seed=args.seed)
    f = load_formula(args.dimacs)
    k = need_k(args.k, f)
    r = args.r if args.r is not None else Fraction(f.m, max(f.n_vars, 1))
    if args.prune:
        f, _ = prune(f, k, r)
    return assign_types(f, k, r, mode=args.mode)


class TypesCommand(Command):
    name = "types"
    help = "build a type system from a pruned formula, a regular degree or the Poisson ensemble"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        add_type_source(p)
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        ts = type_system_from(args)
        payload = {"types": ts, "identity": check_type_identity(ts)}
        if ts.explicit:
            payload["ty"] = check_ty(ts)
        if not payload["identity"].ok:
            log.warning("type identity fails on %d slots", len(payload["identity"].violations))
        emit_json(args, payload)
        return 0
