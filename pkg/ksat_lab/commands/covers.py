from __future__ import annotations
import argparse
import logging

from ..cover import (SCOPE_OCCURRING, SCOPES, cover_from_shade, cover_map, critical_clauses, enumerate_covers,
                     enumerate_shades, is_cover, shade_from_cover)
from ..twosat import NotExtendible, extend_cover, extendibility_discrepancy
from .base import Command, add_out, emit_json, load_formula

log = logging.getLogger("ksat-lab.cli")


def _add_scope(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scope", choices=SCOPES, default=SCOPE_OCCURRING,
                   help="literals constrained by the no-free-star rule")


class CoversCommand(Command):
    name = "covers"
    help = "enumerate the covers of a small formula, or validate one cover map"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--dimacs", required=True)
        p.add_argument("--max-vars", type=int, default=None, help="refuse to enumerate beyond this many variables")
        p.add_argument("--check", default=None, metavar="MAP", help="validate one map, e.g. '1*0'")
        p.add_argument("--shades", action="store_true", help="also enumerate valid shades and check the bijection")
        _add_scope(p)
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        f = load_formula(args.dimacs)
        if args.check is not None:
            z = cover_map(args.check)
            verdict = is_cover(f, z, args.scope)
            payload = {"cover": str(z), "verdict": verdict,
                       "critical_clauses": critical_clauses(f, z)}
            if verdict.ok:
                payload["shade"] = shade_from_cover(f, z, args.scope)
            emit_json(args, payload)
            return 0
        covers = enumerate_covers(f, args.scope, args.max_vars)
        log.info("%d covers over %d variables", len(covers), f.n_vars)
        payload = {"n_vars": f.n_vars, "scope": args.scope, "count": len(covers),
                   "covers": [str(z) for z in covers]}
        if args.shades:
            shades = enumerate_shades(f, args.scope, args.max_vars)
            back = sorted(str(cover_from_shade(f, s, args.scope)) for s in shades)
            payload["shades"] = len(shades)
            payload["bijection"] = back == sorted(payload["covers"])
            if not payload["bijection"]:
                log.warning("shade/cover correspondence broken: %d shades vs %d covers", len(shades), len(covers))
        emit_json(args, payload)
        return 0


class ExtendCommand(Command):
    name = "extend"
    help = "extend a cover to a satisfying assignment through its 2-SAT residual"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--dimacs", required=True)
        p.add_argument("--cover", required=True, metavar="MAP", help="cover map, e.g. '1*0'")
        p.add_argument("--oracle", action="store_true", help="cross-check against brute-force agreeing models")
        _add_scope(p)
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        f = load_formula(args.dimacs)
        z = cover_map(args.cover)
        res = extend_cover(f, z, args.scope)
        if isinstance(res, NotExtendible):
            payload = res.to_dict()
        else:
            payload = {"extendible": True, "assignment": {str(x): v for x, v in sorted(res.items())}}
        payload["cover"] = str(z)
        if args.oracle:
            payload["discrepancy"] = extendibility_discrepancy(f, z, args.scope)
        emit_json(args, payload)
        return 0
