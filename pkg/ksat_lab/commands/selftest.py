"""Desk-scale oracle suites. Each returns (checked, failures) and reports a
mismatch as a failure instead of raising, so one broken suite does not hide the others."""
from __future__ import annotations
import argparse
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from ..cover import cover_from_shade, enumerate_covers, enumerate_shades, shade_from_cover
from ..errors import KsatLabError
from ..formula import gen_uniform, make_formula, make_rng
from ..moments import solve_first_moment
from ..pruning import prune
from ..solver import brute_force_sat
from ..sp import assign_types, check_type_identity, lambda_map, regular_type_system
from ..thresholds import bound_condensation, bound_lower_ap, bound_main
from ..twosat import find_bicycles, solve_2sat, two_sat
from .base import Command, add_out, emit_json

log = logging.getLogger("ksat-lab.selftest")

FIXED_POINT_KS = (5, 6, 7, 8, 9, 10)
BOUND_VALUES = ((bound_main, 4.6986038), (bound_lower_ap, 3.1588830), (bound_condensation, 4.5054566))


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "failures": self.failures[:20]}


@dataclass
class SelftestReport:
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "suites": self.suites}


# ------------- Suites -------------

def cover_bijection(seed: int, instances: int = 60) -> Tuple[int, List[str]]:
    bad: List[str] = []
    single = enumerate_covers(make_formula(3, [(1, 2, 3)]))
    if len(single) != 7:
        bad.append("single clause has %d covers, expected 7" % len(single))
    rng = make_rng(seed)
    for i in range(instances):
        n = int(rng.integers(3, 6))
        m = int(rng.integers(1, 2 * n))
        f = gen_uniform(3, n, m, seed + i)
        covers = enumerate_covers(f)
        shades = enumerate_shades(f)
        if len(covers) != len(shades):
            bad.append("instance %d: %d covers vs %d shades" % (i, len(covers), len(shades)))
            continue
        for z in covers:
            if cover_from_shade(f, shade_from_cover(f, z)) != z:
                bad.append("instance %d: cover %s does not round-trip" % (i, z))
    return instances + 1, bad


def two_sat_equivalence(seed: int, instances: int = 400) -> Tuple[int, List[str]]:
    bad: List[str] = []
    rng = make_rng(seed)
    for i in range(instances):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 3 * n + 2))
        xs = rng.integers(1, n + 1, size=(m, 2))
        sign = rng.choice([-1, 1], size=(m, 2))
        t = two_sat(n, (xs * sign).tolist())
        sol = solve_2sat(t)
        brute = bool(brute_force_sat(t.to_formula()))
        if (sol is not None) != brute:
            bad.append("instance %d: 2-SAT says %s, brute force %s" % (i, sol is not None, brute))
        elif sol is None and not find_bicycles(t, limit=1):
            bad.append("instance %d: unsatisfiable without a bicycle" % i)
    return instances, bad


def fixed_point_residuals(ks=FIXED_POINT_KS, tol: float = 1e-10) -> Tuple[int, List[str]]:
    bad: List[str] = []
    for k in ks:
        d = int(round(k * bound_main(k) / 2.0))
        try:
            res = solve_first_moment(regular_type_system(k, d)).residual
        except KsatLabError as e:
            bad.append("k=%d d=%d: %s" % (k, d, e))
            continue
        if not res <= tol:
            bad.append("k=%d d=%d: residual %.3e" % (k, d, res))
    return len(ks), bad


def type_identity(seed: int, lam: Callable = lambda_map) -> Tuple[int, List[str]]:
    bad: List[str] = []
    systems = [("regular k=%d" % k, regular_type_system(k, 2 ** k, lam=lam)) for k in (4, 5, 6)]
    k, n = 4, 40
    r = 3
    fp, _ = prune(gen_uniform(k, n, r * n, seed), k, r)
    if fp.m:
        systems.append(("pruned k=4 n=40", assign_types(fp, k, r, lam=lam)))
    for name, ts in systems:
        rep = check_type_identity(ts)
        if not rep.ok:
            bad.append("%s: %d slots break the identity" % (name, len(rep.violations)))
    return len(systems), bad


def closed_form_bounds() -> Tuple[int, List[str]]:
    bad: List[str] = []
    for fn, want in BOUND_VALUES:
        got = fn(3)
        if not math.isclose(got, want, abs_tol=1e-6):
            bad.append("%s(3) = %.9f, expected %.7f" % (fn.__name__, got, want))
    for k in range(3, 31):
        if not bound_lower_ap(k) < bound_condensation(k) < bound_main(k):
            bad.append("bounds out of order at k=%d" % k)
    return len(BOUND_VALUES) + 28, bad


def _suite(name: str, fn: Callable[[], Tuple[int, List[str]]]) -> SuiteResult:
    try:
        checked, bad = fn()
    except KsatLabError as e:
        log.exception("suite %s raised", name)
        return SuiteResult(name, False, 0, [str(e)])
    res = SuiteResult(name, not bad, checked, bad)
    log.info("%s %s (%d checks)", "PASS" if res.passed else "FAIL", name, checked)
    for msg in bad[:5]:
        log.warning("  %s", msg)
    return res


def run_selftest(seed: int = 0, *, lam: Callable = lambda_map) -> SelftestReport:
    suites: Dict[str, Callable[[], Tuple[int, List[str]]]] = {
        "cover_bijection": lambda: cover_bijection(seed),
        "two_sat_equivalence": lambda: two_sat_equivalence(seed),
        "fixed_point_residuals": fixed_point_residuals,
        "type_identity": lambda: type_identity(seed, lam),
        "closed_form_bounds": closed_form_bounds,
    }
    return SelftestReport([_suite(name, fn) for name, fn in suites.items()])


class SelftestCommand(Command):
    name = "selftest"
    help = "run the desk-scale oracle suites and report pass/fail per suite"

    def add_arguments(self, p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0)
        add_out(p)

    def run(self, args: argparse.Namespace) -> int:
        rep = run_selftest(args.seed)
        emit_json(args, {"selftest": rep})
        return 0 if rep.passed else 2
