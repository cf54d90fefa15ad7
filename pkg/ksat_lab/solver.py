"""Exhaustive and DPLL SAT solving for desk-scale oracles and Monte Carlo runs."""
from __future__ import annotations
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .errors import CapExceeded, ContractViolation, ValidationError
from .formula import Formula, evaluate, gen_regular, gen_uniform, var_of
from .pruning import Number, as_fraction
from .util.parallel import pmap

log = logging.getLogger("ksat-lab.solver")

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

CHUNK_BITS = 16


# ------------- Brute force -------------

def model_array(f: Formula, cap: Optional[int] = None) -> np.ndarray:
    """All satisfying assignments as rows of 0/1 (column x-1 holds variable x).

    Rows are ordered by the integer whose bit x-1 is the value of x.
    """
    n = f.n_vars
    cap = config.BRUTE_CAP if cap is None else cap
    if n > cap:
        raise CapExceeded("brute force", n, cap)
    total = 1 << n
    step = 1 << min(n, CHUNK_BITS)
    shifts = np.arange(n, dtype=np.int64)
    found: List[np.ndarray] = []
    for start in range(0, total, step):
        idx = np.arange(start, min(total, start + step), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
        ok = np.ones(len(idx), dtype=bool)
        for c in f.clauses:
            sat = np.zeros(len(idx), dtype=bool)
            for l in c:
                col = bits[:, var_of(l) - 1]
                sat |= (col == 1) if l > 0 else (col == 0)
            ok &= sat
            if not ok.any():
                break
        if ok.any():
            found.append(bits[ok])
    if not found:
        return np.zeros((0, n), dtype=np.uint8)
    return np.concatenate(found)


def brute_force_sat(f: Formula, cap: Optional[int] = None) -> List[Tuple[int, ...]]:
    return [tuple(row) for row in model_array(f, cap).tolist()]


# ------------- DPLL -------------

@dataclass
class SatResult:
    status: str
    assignment: Optional[Dict[int, int]] = None
    decisions: int = 0
    propagations: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def to_dict(self) -> dict:
        out = {"status": self.status, "decisions": self.decisions, "propagations": self.propagations}
        if self.assignment is not None:
            out["assignment"] = [self.assignment[x] for x in sorted(self.assignment)]
        return out


class _Timeout(Exception):
    pass


class _Dpll:
    def __init__(self, f: Formula, deadline: Optional[float]):
        self.n = f.n_vars
        self.deadline = deadline
        self.clauses: List[Tuple[int, ...]] = []
        for c in f.clauses:
            lits = tuple(sorted(set(c), key=lambda l: (var_of(l), l < 0)))
            if any(-l in lits for l in lits):
                continue
            self.clauses.append(lits)
        self.occ: Dict[int, List[int]] = {}
        for ci, c in enumerate(self.clauses):
            for l in c:
                self.occ.setdefault(l, []).append(ci)
        self.val = [-1] * (self.n + 1)
        self.trail: List[int] = []
        self.decisions = 0
        self.propagations = 0

    def is_true(self, l: int) -> bool:
        v = self.val[var_of(l)]
        return v == (1 if l > 0 else 0)

    def _set(self, l: int) -> None:
        self.val[var_of(l)] = 1 if l > 0 else 0
        self.trail.append(var_of(l))

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.val[self.trail.pop()] = -1

    def propagate(self, lits: Sequence[int]) -> bool:
        queue = list(lits)
        initial = set(lits)
        while queue:
            l = queue.pop()
            v = self.val[var_of(l)]
            if v != -1:
                if self.is_true(l):
                    continue
                return False
            self._set(l)
            if l not in initial:
                self.propagations += 1
            for ci in self.occ.get(-l, ()):
                free = None
                n_free = 0
                done = False
                for m in self.clauses[ci]:
                    vm = self.val[var_of(m)]
                    if vm == -1:
                        n_free += 1
                        free = m
                    elif vm == (1 if m > 0 else 0):
                        done = True
                        break
                if done:
                    continue
                if n_free == 0:
                    return False
                if n_free == 1:
                    queue.append(free)
        return True

    def simplify(self) -> Optional[int]:
        """Assign pure literals; return a branching literal, or None when every clause is satisfied."""
        while True:
            counts: Dict[int, int] = {}
            for c in self.clauses:
                if any(self.is_true(l) for l in c):
                    continue
                for l in c:
                    if self.val[var_of(l)] == -1:
                        counts[l] = counts.get(l, 0) + 1
            if not counts:
                return None
            pure = [l for l in counts if -l not in counts]
            if not pure:
                return min(counts, key=lambda l: (-counts[l], var_of(l), l < 0))
            for l in pure:
                self._set(l)

    def check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()

    def run(self) -> bool:
        units = [c[0] for c in self.clauses if len(c) == 1]
        if not self.propagate(units):
            return False
        stack: List[List] = []
        while True:
            self.check_time()
            lit = self.simplify()
            if lit is None:
                return True
            stack.append([len(self.trail), lit, False])
            self.decisions += 1
            ok = self.propagate([lit])
            while not ok:
                if not stack:
                    return False
                frame = stack[-1]
                self.undo(frame[0])
                if frame[2]:
                    stack.pop()
                    continue
                frame[2] = True
                self.decisions += 1
                self.check_time()
                ok = self.propagate([-frame[1]])


def dpll_solve(f: Formula, timeout: Optional[float] = None) -> SatResult:
    """DPLL with unit propagation, pure literals and max-occurrence branching."""
    timeout = config.DPLL_TIMEOUT if timeout is None else timeout
    deadline = time.monotonic() + timeout if timeout and timeout > 0 else None
    s = _Dpll(f, deadline)
    try:
        sat = s.run()
    except _Timeout:
        log.info("dpll timed out after %d decisions", s.decisions)
        return SatResult(UNKNOWN, None, s.decisions, s.propagations)
    if not sat:
        return SatResult(UNSAT, None, s.decisions, s.propagations)
    assignment = {x: (s.val[x] if s.val[x] != -1 else 1) for x in range(1, f.n_vars + 1)}
    if not evaluate(f, assignment):
        raise ContractViolation("dpll returned an assignment that does not satisfy the formula")
    return SatResult(SAT, assignment, s.decisions, s.propagations)


# ------------- Monte Carlo -------------

@dataclass
class SatEstimate:
    r: float
    fraction: float
    stderr: float
    sat: int
    unsat: int
    unknown: int
    m: int

    @property
    def decided(self) -> int:
        return self.sat + self.unsat

    def to_dict(self) -> dict:
        return {"r": self.r, "fraction": self.fraction, "stderr": self.stderr, "sat": self.sat,
                "unsat": self.unsat, "unknown": self.unknown, "m": self.m}


def _summarize(r: float, m: int, results: List[SatResult]) -> SatEstimate:
    sat = sum(1 for res in results if res.status == SAT)
    unsat = sum(1 for res in results if res.status == UNSAT)
    unknown = len(results) - sat - unsat
    if unknown:
        log.warning("r=%.6g: %d of %d trials timed out and are excluded", r, unknown, len(results))
    decided = sat + unsat
    p = sat / decided if decided else float("nan")
    se = math.sqrt(p * (1.0 - p) / decided) if decided else float("nan")
    return SatEstimate(r, p, se, sat, unsat, unknown, m)


def estimate_sat_probability(k: int, n: int, r: Number, trials: int, seed: int,
                             timeout: Optional[float] = None) -> SatEstimate:
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    m = math.ceil(as_fraction(r) * n)

    def one(t: int) -> SatResult:
        return dpll_solve(gen_uniform(k, n, m, seed ^ t), timeout)

    return _summarize(float(as_fraction(r)), m, pmap(one, range(trials)))


def sat_probability_curve(k: int, n: int, rs: Sequence[Number], trials: int, seed: int,
                          timeout: Optional[float] = None) -> List[SatEstimate]:
    """One estimate per density; every density reuses the same trial seeds."""
    return [estimate_sat_probability(k, n, r, trials, seed, timeout) for r in rs]


def regular_sat_curve(k: int, n: int, ds: Sequence[int], trials: int, seed: int,
                      timeout: Optional[float] = None) -> List[Tuple[int, SatEstimate]]:
    out = []
    for d in ds:
        def one(t: int, d=d) -> SatResult:
            return dpll_solve(gen_regular(k, d, n, seed ^ t), timeout)
        out.append((d, _summarize(2.0 * d / k, 2 * n * d // k, pmap(one, range(trials)))))
    return out


def monotone_violations(curve: Sequence[SatEstimate], sigmas: float = 3.0) -> List[Tuple[float, float]]:
    """Pairs r_i < r_j whose fractions increase by more than `sigmas` combined standard errors."""
    pts = sorted(curve, key=lambda e: e.r)
    bad = []
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            if b.fraction - a.fraction > sigmas * math.sqrt(a.stderr ** 2 + b.stderr ** 2) + 1e-12:
                bad.append((a.r, b.r))
    return bad


def transition_width(curve: Sequence[SatEstimate], lo: float = 0.1, hi: float = 0.9) -> float:
    """Density gap between P(sat) = hi and P(sat) = lo by linear interpolation."""
    pts = sorted(curve, key=lambda e: e.r)
    rs = np.array([e.r for e in pts])
    fr = np.minimum.accumulate(np.array([e.fraction for e in pts]))
    x, y = fr[::-1], rs[::-1]
    return float(np.interp(lo, x, y) - np.interp(hi, x, y))


@dataclass
class ThresholdEstimate:
    estimate: float
    curve: List[SatEstimate]
    violations: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "monotone": self.monotone,
                "violations": [list(v) for v in self.violations],
                "curve": [e.to_dict() for e in sorted(self.curve, key=lambda e: e.r)]}


def empirical_threshold(k: int, n: int, trials: int, r_lo: float, r_hi: float, tol: float,
                        seed: int = 0, timeout: Optional[float] = None,
                        checkpoint=None) -> ThresholdEstimate:
    """Bisection on r for P(sat) = 1/2 with per-point Monte Carlo."""
    if not r_lo < r_hi:
        raise ValidationError("need r_lo < r_hi")
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    curve: List[SatEstimate] = []

    def point(r: float) -> SatEstimate:
        key = repr(float(r))
        if checkpoint is not None and key in checkpoint:
            return SatEstimate(**checkpoint.get(key))
        est = estimate_sat_probability(k, n, r, trials, seed, timeout)
        if checkpoint is not None:
            checkpoint.put(key, est.to_dict())
        return est

    lo, hi = float(r_lo), float(r_hi)
    curve.append(point(lo))
    curve.append(point(hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        est = point(mid)
        curve.append(est)
        log.info("r=%.6f P(sat)=%.3f +- %.3f", mid, est.fraction, est.stderr)
        if est.fraction >= 0.5:
            lo = mid
        else:
            hi = mid
    bad = monotone_violations(curve)
    if bad:
        log.warning("sat-probability curve is non-monotone beyond 3 sigma at %d pairs", len(bad))
    return ThresholdEstimate(0.5 * (lo + hi), curve, bad)
