"""Degree pruning: seed U with degree outliers, delete clauses holding three or
more U-variables, re-check degrees, repeat, then strip U from the survivors.

All window comparisons are exact: |D - kr/2| > k^3 2^(k/2) is evaluated as
(D - kr/2)^2 > k^6 2^k over Fractions.
"""
from __future__ import annotations
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .errors import ValidationError
from .formula import Clause, Formula, degree_profile, var_of

log = logging.getLogger("ksat-lab.pruning")

Number = Union[int, float, str, Fraction]


def as_fraction(r: Number) -> Fraction:
    if isinstance(r, Fraction):
        return r
    if isinstance(r, float):
        return Fraction(repr(r))
    return Fraction(r)


def degree_target(k: int, r: Number) -> Fraction:
    return Fraction(k) * as_fraction(r) / 2


def window_sq(k: int) -> int:
    """(k^3 2^(k/2))^2, an integer for every k."""
    return k ** 6 * 2 ** k


def out_of_window(d: int, target: Fraction, k: int) -> bool:
    dev = Fraction(d) - target
    return dev * dev > window_sq(k)


@dataclass
class PruneReport:
    removed_vars: Set[int]
    removed_clause_ids: Set[int]
    short_clause_ids: Set[int]
    rounds: int
    n_kept: int
    m_kept: int
    widths_histogram: Dict[int, int]
    target: Fraction
    retarget: bool = False

    def to_dict(self) -> dict:
        return {
            "removed_vars": sorted(self.removed_vars),
            "removed_clauses": sorted(self.removed_clause_ids | self.short_clause_ids),
            "short_clauses": sorted(self.short_clause_ids),
            "rounds": self.rounds,
            "widths_histogram": {str(w): c for w, c in sorted(self.widths_histogram.items())},
            "kept_vars": self.n_kept,
            "kept_clauses": self.m_kept,
            "target": self.target,
            "retarget": self.retarget,
        }


def _violators(deg: Dict[int, int], variables: Sequence[int], target: Fraction, k: int) -> Set[int]:
    return {x for x in variables
            if out_of_window(deg[x], target, k) or out_of_window(deg[-x], target, k)}


def prune(f: Formula, k: int, r: Number, *, retarget: bool = False,
          scan_order: Optional[Sequence[int]] = None) -> Tuple[Formula, PruneReport]:
    r = as_fraction(r)
    if r <= 0:
        raise ValidationError("density r must be > 0")
    if k < 2:
        raise ValidationError("k must be >= 2")
    order = list(range(f.m)) if scan_order is None else list(scan_order)
    if sorted(order) != list(range(f.m)):
        raise ValidationError("scan_order must be a permutation of the clause indices")

    target = degree_target(k, r)
    deg = degree_profile(f)
    all_vars = list(range(1, f.n_vars + 1))
    U = _violators(deg, all_vars, target, k)
    log.debug("PR1 seeds %d variables", len(U))

    alive = [True] * f.m
    removed: Set[int] = set()
    rounds = 0
    while True:
        doomed = [i for i in order
                  if alive[i] and len({var_of(l) for l in f.clauses[i]} & U) >= 3]
        if not doomed:
            break
        rounds += 1
        for i in doomed:
            alive[i] = False
            removed.add(i)
            for l in f.clauses[i]:
                deg[l] -= 1
        if retarget and f.n_vars:
            target = Fraction(k * (f.m - len(removed)), 2 * f.n_vars)
        fresh = _violators(deg, [x for x in all_vars if x not in U], target, k)
        log.debug("PR2 round %d: %d clauses deleted, %d variables added", rounds, len(doomed), len(fresh))
        U |= fresh

    kept: List[Clause] = []
    short: Set[int] = set()
    for i, c in enumerate(f.clauses):
        if not alive[i]:
            continue
        stripped = tuple(l for l in c if var_of(l) not in U)
        if len(stripped) < max(1, k - 2):
            short.add(i)
            continue
        kept.append(stripped)
    if short:
        log.warning("deleted %d clauses that fell below width %d after stripping", len(short), k - 2)

    fp = Formula(n_vars=f.n_vars, clauses=tuple(kept), k=k)
    report = PruneReport(
        removed_vars=U,
        removed_clause_ids=removed,
        short_clause_ids=short,
        rounds=rounds,
        n_kept=f.n_vars - len(U),
        m_kept=len(kept),
        widths_histogram=dict(Counter(len(c) for c in kept)),
        target=degree_target(k, r),
        retarget=retarget,
    )
    return fp, report


@dataclass
class DegreeBoundReport:
    violators: List[Tuple[int, int]] = field(default_factory=list)
    target: Fraction = Fraction(0)

    @property
    def ok(self) -> bool:
        return not self.violators

    def to_dict(self) -> dict:
        return {"ok": self.ok, "target": self.target,
                "violators": [{"literal": l, "degree": d} for l, d in self.violators]}


def check_degree_bounds(fp: Formula, k: int, r: Number) -> DegreeBoundReport:
    """Checks |d_l - kr/2| <= k^3 2^(k/2) for both literals of every variable occurring in fp."""
    target = degree_target(k, r)
    deg = degree_profile(fp)
    bad: List[Tuple[int, int]] = []
    for x in fp.variables():
        for l in (x, -x):
            if out_of_window(deg[l], target, k):
                bad.append((l, deg[l]))
    return DegreeBoundReport(bad, target)


def extension_holds(f: Formula, fp: Formula, report: PruneReport) -> bool:
    """Desk-scale check: every satisfying assignment of fp, restricted to the
    kept variables, extends to a satisfying assignment of f."""
    from .solver import model_array

    kept = [x for x in range(1, f.n_vars + 1) if x not in report.removed_vars]
    cols = [x - 1 for x in kept]
    full = {tuple(row) for row in model_array(f)[:, cols].tolist()}
    for row in model_array(fp)[:, cols].tolist():
        if tuple(row) not in full:
            return False
    return True
