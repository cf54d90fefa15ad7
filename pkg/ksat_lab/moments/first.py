"""First moment of the number of covers on a type system.

solve_first_moment finds the tilting parameters q: on the literal side the
per-clone red probabilities q_(t,h) with t^1 q_(t,h) / s_t = t_h^r, on the
clause side the per-slot purple probabilities q_(l,j) with e_(l,j) = l_j^p.
first_moment_rate turns them into entropy + occupancy + validity.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import root
from scipy.special import entr, rel_entr, xlogy

from .. import config
from ..errors import ConvergenceError, DomainError, ValidationError
from ..sp import ClauseBlock, LiteralTable, TypeSystem, poisson_type_ensemble
from ..thresholds import bound_main
from ..util.infotheory import kl_binary
from ..util.products import excl1

log = logging.getLogger("ksat-lab.moments")

VARIANT_WEIGHTED = "weighted"
VARIANT_PLAIN = "plain"
VARIANTS = (VARIANT_WEIGHTED, VARIANT_PLAIN)

BISECT_STEPS = 80
POLISH_ROOT_MAX = 4000


# ------------- Literal side -------------

def solve_red_scale(a: np.ndarray, mult: np.ndarray, *, what: str = "occupancy") -> np.ndarray:
    """Per row, the root s in (0, 1) of s = 1 - prod_w (1 - a_w s)^mult_w.

    A non-zero root exists iff sum_w mult_w a_w > 1. Rows with no clones at
    all return s = 0.
    """
    a = np.asarray(a, dtype=float)
    mult = np.asarray(mult, dtype=float)
    mu = (a * mult).sum(axis=1)
    empty = mult.sum(axis=1) == 0
    if np.any(~empty & (mu <= 1.0)):
        bad = int(np.sum(~empty & (mu <= 1.0)))
        raise DomainError("no interior %s fixed point for %d rows (expected red clones per true literal <= 1, "
                          "min %.6g)" % (what, bad, float(mu[~empty].min())))
    if np.any(a >= 1.0):
        raise DomainError("%s: red mass reaches the true mass" % what)

    def log_miss(s):
        return (mult * np.log1p(-a * s[:, None])).sum(axis=1)

    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        g = -np.expm1(log_miss(mid)) - mid
        up = g > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    s = 0.5 * (lo + hi)
    for _ in range(3):
        lm = log_miss(s)
        phi = -np.expm1(lm) - s
        dphi = np.exp(lm) * (mult * a / (1.0 - a * s[:, None])).sum(axis=1) - 1.0
        s = s - np.where(dphi < 0, phi / dphi, 0.0)
    return np.where(empty, 0.0, s)


# ------------- Clause side -------------

def clause_terms(q: np.ndarray, red: np.ndarray):
    """(e^p, g^r, g^c) for slot purple probabilities q of shape (C, width)."""
    y = 1.0 - q
    ex = excl1(y)
    gr = q * ex
    gc = 1.0 - y.prod(axis=1) - gr.sum(axis=1)
    rest = 1.0 - red.sum(axis=1)
    e = red + q * (1.0 - ex) * (rest / gc)[:, None]
    return e, gr, gc


def solve_clause_block(b: ClauseBlock, tol: float, max_iter: int, damping: float):
    kappa = b.width
    q = np.clip(b.purple - 2.0 ** (-kappa - 1), 1e-300, 1.0 - 1e-16)
    res = math.inf
    for it in range(1, max_iter + 1):
        e, _, gc = clause_terms(q, b.red)
        if not np.all(np.isfinite(e)) or np.any(gc <= 0):
            raise DomainError("no interior clause fixed point for width %d (g^c left (0,1))" % kappa)
        diff = b.purple - e
        res = float(np.max(np.abs(diff)))
        if res <= tol:
            return q, res, it
        q = q + damping * diff
        if np.any(q <= 0) or np.any(q >= 1):
            raise DomainError("no interior clause fixed point for width %d (q left (0,1))" % kappa)
    if q.size <= POLISH_ROOT_MAX:
        def fun(x):
            return (b.purple - clause_terms(x.reshape(q.shape), b.red)[0]).ravel()
        sol = root(fun, q.ravel(), method="hybr", tol=tol)
        cand = sol.x.reshape(q.shape)
        cres = float(np.max(np.abs(fun(sol.x))))
        if cres <= tol and np.all((cand > 0) & (cand < 1)):
            log.info("clause fixed point polished by root(hybr) after %d iterations", max_iter)
            return cand, cres, max_iter
    raise ConvergenceError("clause fixed point did not converge in %d iterations" % max_iter, res)


# ------------- Parameters -------------

@dataclass
class FirstMomentParams:
    q_r: np.ndarray
    s: np.ndarray
    q_p: List[np.ndarray]
    residual: float
    residual_literal: float
    residual_clause: float
    iterations: int

    def to_dict(self) -> dict:
        out: Dict[str, object] = {"residual": self.residual, "residual_literal": self.residual_literal,
                                  "residual_clause": self.residual_clause, "iterations": self.iterations}
        if self.q_r.shape[0] <= 1000:
            out["q_r"] = self.q_r
            out["s"] = self.s
            out["q_p"] = list(self.q_p)
        else:
            out["q_r_range"] = [float(self.q_r.min()), float(self.q_r.max())]
            out["q_p_range"] = [float(min(q.min() for q in self.q_p)), float(max(q.max() for q in self.q_p))]
        return out


def solve_first_moment(ts: TypeSystem, tol: Optional[float] = None, *,
                       max_iter: Optional[int] = None, damping: Optional[float] = None) -> FirstMomentParams:
    tol = config.TOL if tol is None else tol
    max_iter = config.MAX_ITER if max_iter is None else max_iter
    damping = config.DAMPING if damping is None else damping

    lt = ts.literal_table()
    a = lt.red / lt.p1[:, None]
    s = solve_red_scale(a, lt.mult)
    q_r = a * s[:, None]
    e_r = lt.p1[:, None] * q_r / np.where(s > 0, s, 1.0)[:, None]
    res_lit = float(np.max(np.where(lt.mult > 0, np.abs(e_r - lt.red), 0.0))) if lt.red.size else 0.0

    q_p: List[np.ndarray] = []
    res_cl = 0.0
    iters = 0
    for b in ts.clause_blocks():
        q, res, it = solve_clause_block(b, tol, max_iter, damping)
        q_p.append(q)
        res_cl = max(res_cl, res)
        iters = max(iters, it)
    residual = max(res_lit, res_cl)
    log.debug("first moment fixed point: residual %.3e (literal %.3e, clause %.3e) after %d iterations",
              residual, res_lit, res_cl, iters)
    return FirstMomentParams(q_r, s, q_p, residual, res_lit, res_cl, iters)


# ------------- Rate -------------

@dataclass
class RateResult:
    rate: float
    components: Dict[str, float]
    params: Optional[FirstMomentParams] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    polylog_c: Optional[float] = None
    variant: str = VARIANT_WEIGHTED
    fallback: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"rate": self.rate, "components": self.components, "residuals": self.residuals,
               "polylog_C": self.polylog_c, "variant": self.variant}
        if self.fallback:
            out["fallback"] = self.fallback
        if self.params is not None:
            out["params"] = self.params
        return out


def literal_entropy(lt: LiteralTable) -> float:
    return float(np.sum(lt.weight * (entr(lt.p1) + entr(lt.p0) + entr(lt.pstar))))


def occupancy_terms(lt: LiteralTable, q_r: np.ndarray, variant: str = VARIANT_WEIGHTED) -> np.ndarray:
    """F_occ,t per literal type.

    p1 ln s_t + pstar sum_w mult ln(1 - q_r) + pref sum_w mult KL(red / purple || q_r).
    VARIANT_WEIGHTED takes pref = t^1 + t^* (the purple mass) together with the
    KL of the red ratio t^r / t^p against q_r; VARIANT_PLAIN keeps the same KL
    with pref = 1.
    """
    log_miss = (lt.mult * np.log1p(-q_r)).sum(axis=1)
    s = -np.expm1(log_miss)
    has = lt.mult.sum(axis=1) > 0
    if np.any(has & ((s <= 0) | (s >= 1))):
        raise DomainError("occupancy probability s_t left (0, 1)")
    ratio = lt.red / lt.purple[:, None]
    kl = (lt.mult * kl_binary(ratio, q_r)).sum(axis=1)
    pref = lt.purple if variant == VARIANT_WEIGHTED else 1.0
    occ = xlogy(lt.p1, np.where(has, s, 1.0)) + lt.pstar * log_miss + pref * kl
    # a literal with no clones can only be 0 or *
    return np.where(has, occ, np.where(lt.p1 > 0, -np.inf, 0.0))


def validity_terms(b: ClauseBlock, q: np.ndarray) -> np.ndarray:
    """F_val,l per clause type of the block."""
    _, gr, gc = clause_terms(q, b.red)
    rest = 1.0 - b.red.sum(axis=1)
    kl_classes = rel_entr(b.red, gr).sum(axis=1) + rel_entr(rest, gc)
    return -kl_classes + kl_binary(b.purple, q).sum(axis=1)


def first_moment_rate(ts: TypeSystem, params: Optional[FirstMomentParams] = None, *,
                      variant: str = VARIANT_WEIGHTED, tol: Optional[float] = None) -> RateResult:
    """rate = sum_t pi_t [H(t) + 2 F_occ,t] + (m/n) sum_l pi_l F_val,l.

    On ensembles carrying a slot mean of p0, the clause average uses the
    control variate prod_j l_j^y, whose exact mean is that slot mean to the
    power k.
    """
    if variant not in VARIANTS:
        raise ValidationError("unknown occupancy variant %r" % variant)
    tol = config.TOL if tol is None else tol
    if params is None:
        params = solve_first_moment(ts, tol)
    if params.residual > max(tol, 1e-10):
        raise ConvergenceError("first-moment parameters not at a fixed point", params.residual)

    lt = ts.literal_table()
    entropy = literal_entropy(lt)
    occ_t = occupancy_terms(lt, params.q_r, variant)
    occupancy = float(2.0 * np.sum(lt.weight * occ_t))

    clause_validity = 0.0
    for b, q in zip(ts.clause_blocks(), params.q_p):
        f_val = validity_terms(b, q)
        if ts.yellow_slot_mean is not None and len(ts.clause_blocks()) == 1:
            cv = b.yellow.prod(axis=1)
            clause_validity += float(np.sum(b.weight * (f_val + cv))) - ts.yellow_slot_mean ** b.width
        else:
            clause_validity += float(np.sum(b.weight * f_val))
    density = float(ts.density)
    validity = density * clause_validity
    rate = entropy + occupancy + validity
    c = ts.polylog_c()
    return RateResult(
        rate=rate,
        components={"entropy": entropy, "occupancy": occupancy, "validity": validity,
                    "clause_validity": clause_validity},
        params=params,
        residuals={"first_moment": params.residual},
        polylog_c=None if c is None else float(c),
        variant=variant)


def variant_gap(ts: TypeSystem, params: Optional[FirstMomentParams] = None) -> float:
    """Occupancy difference between the two F_occ readings."""
    params = params or solve_first_moment(ts)
    a = first_moment_rate(ts, params, variant=VARIANT_WEIGHTED)
    b = first_moment_rate(ts, params, variant=VARIANT_PLAIN)
    return a.components["occupancy"] - b.components["occupancy"]


# ------------- Asymptotic expansion -------------

@dataclass
class TermRow:
    name: str
    value: float
    claim: float
    deviation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "claim": self.claim,
                "deviation": self.deviation, "tolerance": self.tolerance, "ok": self.ok}


@dataclass
class AsymptoticReport:
    k: int
    r: float
    rate: float
    truncation: float
    rows: List[TermRow]

    def row(self, name: str) -> TermRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"k": self.k, "r": self.r, "rate": self.rate, "truncation": self.truncation, "rows": self.rows}


def asymptotic_terms(k: int, r: Optional[float] = None, *, samples: Optional[int] = None,
                     seed: int = 0) -> AsymptoticReport:
    """Poisson-ensemble components next to their leading-order expansions."""
    if k < 6:
        raise ValidationError("asymptotic_terms needs k >= 6, got %d" % k)
    r = bound_main(k) if r is None else float(r)
    ts = poisson_type_ensemble(k, r, samples=samples, seed=seed)
    res = first_moment_rate(ts)
    ln2 = math.log(2.0)
    tol_main = k ** 3 * 2.0 ** (-1.5 * k)
    tol_val = k ** 3 * 2.0 ** (-2.5 * k) + ts.truncation
    val = res.components["clause_validity"]
    rows = [
        TermRow("entropy", res.components["entropy"], ln2 + 2.0 ** (-k - 1), 0.0, tol_main),
        TermRow("occupancy", res.components["occupancy"], -2.0 ** (-k) - k * 2.0 ** (-k) * ln2, 0.0, tol_main),
        TermRow("validity", val, -2.0 ** (-k) + k * 2.0 ** (-2 * k - 1), 0.0, tol_val),
        TermRow("validity_statement", val, -2.0 ** (-k) + k * 2.0 ** (-2 * k), 0.0, tol_val),
    ]
    for row in rows:
        row.deviation = abs(row.value - row.claim)
        if not row.ok:
            log.warning("k=%d %s deviates from its expansion by %.3e (tolerance %.3e)",
                        k, row.name, row.deviation, row.tolerance)
    return AsymptoticReport(k, r, res.rate, ts.truncation, rows)
