from __future__ import annotations
import argparse
import logging
import math
from fractions import Fraction

from ..errors import ValidationError
from ..formula import gen_regular, gen_uniform, majority_vote, write_dimacs
from ..pruning import check_degree_bounds, prune
from ..util import emit
from .base import Command, add_out, density, load_formula, need_k, run_meta

log = logging.getLogger("ksat-lab.cli")


class GenCommand(Command):
    name = "gen"
    help = "generate a random uniform or regular k-CNF as DIMACS"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--n", type=int, required=True, help="number of variables")
        size = p.add_mutually_exclusive_group(required=True)
        size.add_argument("--m", type=int, help="number of clauses (uniform model)")
        size.add_argument("--r", type=density, help="clause density m/n (uniform model)")
        size.add_argument("--d", type=int, help="per-literal degree (regular model)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--majority", default=None, metavar="PATH",
                       help="also write the majority-vote assignment as JSON")
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        if args.d is not None:
            f = gen_regular(args.k, args.d, args.n, args.seed)
            model = "regular k=%d d=%d" % (args.k, args.d)
        else:
            m = args.m if args.m is not None else math.ceil(args.r * args.n)
            f = gen_uniform(args.k, args.n, m, args.seed)
            model = "uniform k=%d m=%d" % (args.k, m)
        log.info("generated %s formula: n=%d m=%d", model, f.n_vars, f.m)
        comments = ["ksat-lab gen %s n=%d seed=%d" % (model, args.n, args.seed)]
        emit.write_text(args.out, write_dimacs(f, comments).decode("ascii"), meta=run_meta(args))
        if args.majority:
            emit.write_json(args.majority, {"majority_vote": majority_vote(f, args.seed)}, meta=run_meta(args))
        return 0


class PruneCommand(Command):
    name = "prune"
    help = "remove high-deviation variables and short clauses from a DIMACS formula"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--dimacs", required=True)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--r", type=density, default=None, help="density used for kr/2 (default m/n)")
        p.add_argument("--retarget", action="store_true", help="recompute kr/2 from the current clause count")
        p.add_argument("--report", default=None, metavar="PATH", help="JSON prune report")
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        f = load_formula(args.dimacs)
        k = need_k(args.k, f)
        if args.r is None:
            if f.n_vars == 0:
                raise ValidationError("cannot infer density of an empty formula; pass --r")
            args.r = Fraction(f.m, f.n_vars)
        fp, rep = prune(f, k, args.r, retarget=args.retarget)
        bounds = check_degree_bounds(fp, k, args.r)
        log.info("pruned %d variables and %d clauses in %d rounds",
                 len(rep.removed_vars), len(rep.removed_clause_ids | rep.short_clause_ids), rep.rounds)
        emit.write_text(args.out, write_dimacs(fp, ["ksat-lab prune of %s" % args.dimacs]).decode("ascii"),
                        meta=run_meta(args))
        if args.report:
            emit.write_json(args.report, {"prune": rep, "degree_bounds": bounds}, meta=run_meta(args))
        return 0
