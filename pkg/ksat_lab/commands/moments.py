from __future__ import annotations
import argparse
import logging

import numpy as np

from ..errors import ValidationError
from ..formula import make_rng
from ..moments import (VARIANT_WEIGHTED, asymptotic_terms, boundary_check, check_concavity, check_stationary,
                       feasible_basis, fhat_scan, first_moment_rate, product_overlap, regular_threshold,
                       scan_middle_ground, second_moment_f, solve_first_moment, sup_psi, variant_gap)
from ..moments.first import VARIANTS
from ..moments.rough import GAMMA_NAMES
from ..thresholds import bound_main
from .base import (Command, add_out, add_resume, checkpoint_for, emit_csv, emit_json, float_list,
                   int_range)
from .types import add_type_source, type_system_from

log = logging.getLogger("ksat-lab.cli")


class FirstMomentCommand(Command):
    name = "first-moment"
    help = "solve the first-moment fixed point and evaluate the cover growth rate"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        add_type_source(p)
        p.add_argument("--variant", choices=VARIANTS, default=VARIANT_WEIGHTED, help="occupancy term reading")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--asymptotic", action="store_true",
                       help="Poisson ensemble components next to their leading-order expansions (needs --k)")
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        if args.asymptotic:
            if args.k is None:
                raise ValidationError("--asymptotic needs --k")
            r = None if args.r is None else float(args.r)
            emit_json(args, {"asymptotic": asymptotic_terms(args.k, r, samples=args.samples, seed=args.seed)})
            return 0
        ts = type_system_from(args)
        params = solve_first_moment(ts, args.tol)
        res = first_moment_rate(ts, params, variant=args.variant, tol=args.tol)
        log.info("first moment rate %.12g (residual %.3e)", res.rate, params.residual)
        emit_json(args, {"types": {"k": ts.k, "mode": ts.mode, "density": ts.density},
                         "result": res, "variant_gap": variant_gap(ts, params)})
        return 0


class SecondMomentCommand(Command):
    name = "second-moment"
    help = "evaluate the second-moment rate f, or check stationarity / concavity at the product overlap"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("action", choices=("evaluate", "stationary", "concavity"))
        add_type_source(p)
        p.add_argument("--radius", type=float, default=0.0,
                       help="evaluate: move this far from the product along a random feasible direction; "
                            "concavity: sample sphere radius")
        p.add_argument("--shift", type=float, default=None, help="stationary: move the base point first")
        p.add_argument("--h", type=float, default=None, help="finite-difference step")
        p.add_argument("--n-samples", type=int, default=8)
        p.add_argument("--fallback", action="store_true", help="report f-hat where f cannot be solved")
        p.add_argument("--tol", type=float, default=None)
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        ts = type_system_from(args)
        if args.action == "stationary":
            rep = check_stationary(ts, args.h or 1e-5, args.shift, args.tol)
            emit_json(args, {"stationary": rep})
            return 0
        if args.action == "concavity":
            rep = check_concavity(ts, args.n_samples, args.radius or 1e-3, seed=args.seed,
                                  h_step=args.h or 1e-4, tol=args.tol)
            emit_json(args, {"concavity": rep})
            return 0
        ov = product_overlap(ts)
        if args.radius:
            fb = feasible_basis(ts)
            z = make_rng(args.seed).standard_normal(fb.dim)
            z *= args.radius / np.linalg.norm(z)
            ov = ov.moved(fb.point(z))
        res = second_moment_f(ts, ov, args.tol, fallback=args.fallback)
        payload = {"at_product": not args.radius, "result": res}
        if not args.radius:
            first = first_moment_rate(ts, tol=args.tol).rate
            payload["twice_first_moment"] = 2.0 * first
            payload["product_gap"] = res.rate - 2.0 * first
        emit_json(args, payload)
        return 0


class PsiScanCommand(Command):
    name = "psi-scan"
    help = "rough second-moment bounds: middle-ground scan, boundary psi and sup psi over Gamma(O)"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--r", type=float, default=None, help="density (default bound_main(k))")
        p.add_argument("--grid", type=int, default=10000)
        p.add_argument("--o10", type=float, default=None, help="also maximise psi over Gamma(O) at this O^10")
        p.add_argument("--o1s", type=float, default=0.0, help="O^1* for --o10")
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        r = bound_main(args.k) if args.r is None else args.r
        scan = scan_middle_ground(args.k, r, args.grid)
        payload = {"middle_ground": scan, "boundary": boundary_check(args.k, r)}
        if args.o10 is not None:
            payload["sup_psi"] = dict(sup_psi(args.k, r, args.o10, args.o1s).to_dict(),
                                      o10=args.o10, o1s=args.o1s, gamma_order=list(GAMMA_NAMES))
        emit_json(args, payload)
        emit_csv(args, ["y", "bound"], scan.rows())
        return 0


class FhatCommand(Command):
    name = "fhat"
    help = "f-hat along the path from the diagonal overlap (alpha = 0) to the product (alpha = 1)"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        add_type_source(p)
        p.add_argument("--alphas", type=float_list, default=None, help="comma list in [0, 1] (default 0:1 step 0.05)")
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        ts = type_system_from(args)
        alphas = args.alphas if args.alphas is not None else np.linspace(0.0, 1.0, 21).tolist()
        scan = fhat_scan(ts, alphas)
        emit_json(args, {"fhat": scan})
        emit_csv(args, ["alpha", "fhat"], scan.rows())
        return 0


class RegularXiCommand(Command):
    name = "regular-xi"
    help = "Xi(k, d) for random regular k-SAT over a degree range, and the threshold degree d*"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--d-range", type=int_range, default=None, help="'lo:hi' (default around k 2^k ln2 / 2)")
        add_resume(p)
        add_out(p, csv=True)

    def run(self, args: argparse.Namespace) -> int:
        cp = checkpoint_for(args, {"k": args.k, "d_range": args.d_range})
        scan = regular_threshold(args.k, args.d_range, checkpoint=cp)
        emit_json(args, {"regular": scan})
        emit_csv(args, ["d", "xi"], scan.rows())
        return 0
