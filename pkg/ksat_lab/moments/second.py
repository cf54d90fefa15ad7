"""Second-moment rate f(omega, gamma) = f_ent + f_disc + f_val + f_occ.

f_val and f_occ are defined through implicit parameters: per clause type the
slot law q over (pp, py, yp, yy) whose class-conditional slot expectations
reproduce omega_(l,j); per literal type the clone law over (rr, rc, cr) and the
ry / yr probabilities whose cell-conditional expectations reproduce the
clone-level overlap.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import root
from scipy.special import entr, rel_entr, xlogy

from .. import config
from ..errors import ConvergenceError, DomainError, ValidationError
from ..sp import TypeSystem
from ..util.products import excl1, excl2
from .first import POLISH_ROOT_MAX, RateResult, solve_red_scale
from .overlap import (ONE, PP, PY, RY, STAR, YP, YR, ZERO, ClassMasses, Overlap, aggregate, check_affine,
                      clause_classes, clone_classes, layout_for, literal_joint, slot_joint)
from .rough import fhat_at

log = logging.getLogger("ksat-lab.moments")

AFFINE_SLACK = 1e-9


# ------------- Clause side -------------

@dataclass
class _SlotProducts:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    E1d: np.ndarray
    E1y1: np.ndarray
    E1y2: np.ndarray
    E2d: np.ndarray
    E2y1: np.ndarray
    E2y2: np.ndarray
    off: np.ndarray


def _products(q: np.ndarray) -> _SlotProducts:
    a, b, c, d = q[:, PP], q[:, PY], q[:, YP], q[:, 3]
    y1 = c + d
    y2 = b + d
    off = ~np.eye(q.shape[0], dtype=bool)
    return _SlotProducts(a, b, c, d, excl1(d), excl1(y1), excl1(y2), excl2(d) * off, excl2(y1) * off,
                         excl2(y2) * off, off)


def class_probabilities(q: np.ndarray) -> ClassMasses:
    """g(q): class probabilities of a clause whose slots are independent with law q (kappa, 4)."""
    P = _products(q)
    a, b, c, d = P.a, P.b, P.c, P.d
    yy = b[:, None] * c[None, :] * P.E2d
    rr = a * P.E1d
    rc = a * (P.E1y1 - P.E1d)
    cr = a * (P.E1y2 - P.E1d)
    ry = b * (P.E1y1 - P.E1d - P.E2d @ c)
    yr = c * (P.E1y2 - P.E1d - P.E2d @ b)
    at_most_one_1 = np.prod(c + d) + np.sum((a + b) * P.E1y1)
    at_most_one_2 = np.prod(b + d) + np.sum((a + c) * P.E1y2)
    both = np.prod(d) + np.sum((1.0 - d) * P.E1d) + yy.sum()
    cc = 1.0 - at_most_one_1 - at_most_one_2 + both
    return ClassMasses(rr, rc, cr, ry, yr, yy, float(cc))


def _per(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # width-2 clauses have ry / yr probability 0 and carry no such mass
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def slot_expectations(q: np.ndarray, gam: ClassMasses, g: Optional[ClassMasses] = None) -> np.ndarray:
    """e(q): expected slot cells (kappa, 4) when the clause class is drawn from gam and the slots from q given it."""
    P = _products(q)
    g = class_probabilities(q) if g is None else g
    for name in ("rc", "cr", "ry", "yr"):
        if np.any((getattr(gam, name) > 0) & (getattr(g, name) <= 0)):
            raise DomainError("clause class %s has mass but probability 0" % name)
    if g.cc <= 0:
        raise DomainError("clause class probability left (0, 1)")
    a, b, c, d = P.a, P.b, P.c, P.d
    cc = gam.cc / g.cc
    e_pp = gam.rr + gam.rc + gam.cr + cc * a * (1.0 - P.E1y1 - P.E1y2 + P.E1d)
    e_py = (gam.ry + gam.yy.sum(axis=1)
            + b * (P.E2y2 @ _per(gam.cr * a, g.cr))
            + b * ((P.E2y2 - P.E2d) @ _per(gam.yr * c, g.yr))
            + cc * b * (1.0 - P.E1y1 - (P.E1y2 + P.E2y2 @ (a + c)) + P.E1d + P.E2d @ c))
    e_yp = (gam.yr + gam.yy.sum(axis=0)
            + c * (P.E2y1 @ _per(gam.rc * a, g.rc))
            + c * ((P.E2y1 - P.E2d) @ _per(gam.ry * b, g.ry))
            + cc * c * (1.0 - P.E1y2 - (P.E1y1 + P.E2y1 @ (a + b)) + P.E1d + P.E2d @ b))
    return np.stack([e_pp, e_py, e_yp, 1.0 - e_pp - e_py - e_yp], axis=1)


def solve_slot_law(omega: np.ndarray, gam: ClassMasses, tol: float, max_iter: int,
                   damping: float) -> Tuple[np.ndarray, float, int]:
    """q with e(q) = omega, by damped additive iteration from q = omega."""
    q = omega.astype(float).copy()
    res = math.inf
    for it in range(1, max_iter + 1):
        diff = omega[:, :3] - slot_expectations(q, gam)[:, :3]
        res = float(np.max(np.abs(diff)))
        if res <= tol:
            return q, res, it
        q[:, :3] += damping * diff
        q[:, 3] = 1.0 - q[:, :3].sum(axis=1)
        if np.any(q <= 0) or np.any(q >= 1):
            raise DomainError("slot law left the open simplex")
    if q.size <= POLISH_ROOT_MAX:
        def fun(v):
            qq = np.column_stack([v.reshape(-1, 3), 1.0 - v.reshape(-1, 3).sum(axis=1)])
            return (omega[:, :3] - slot_expectations(qq, gam)[:, :3]).ravel()
        sol = root(fun, q[:, :3].ravel(), method="hybr", tol=tol)
        cres = float(np.max(np.abs(fun(sol.x))))
        cand = np.column_stack([sol.x.reshape(-1, 3), 1.0 - sol.x.reshape(-1, 3).sum(axis=1)])
        if cres <= tol and np.all((cand > 0) & (cand < 1)):
            return cand, cres, max_iter
    raise ConvergenceError("slot law did not converge in %d iterations" % max_iter, res)


def validity_term(omega: np.ndarray, gam: ClassMasses, q: np.ndarray) -> float:
    """f_val,l = -KL(gamma || g(q)) + sum_j KL(omega_(l,j) || q_j)."""
    g = class_probabilities(q)
    return float(-np.sum(rel_entr(gam.flat(), g.flat())) + np.sum(rel_entr(omega, q)))


# ------------- Literal side -------------

def _log_miss(x: np.ndarray, mult: np.ndarray) -> float:
    return float(np.sum(mult * np.log1p(-x)))


def _red_block(red: np.ndarray, cell: float, mult: np.ndarray, what: str) -> Tuple[np.ndarray, float, float]:
    """(q, s, log(1 - s)) for the cells where exactly one shade can host red clones."""
    if cell <= 0:
        return np.zeros_like(red), 0.0, 0.0
    a = red / cell
    s = float(solve_red_scale(a[None, :], mult[None, :], what=what)[0])
    q = a * s
    return q, s, _log_miss(q, mult)


@dataclass
class _PairState:
    q: np.ndarray
    s11: float
    s1s: float
    ss1: float
    sss: float


def _pair_state(q: np.ndarray, mult: np.ndarray) -> Tuple[_PairState, np.ndarray, np.ndarray]:
    u1 = 1.0 - q[:, 0] - q[:, 1]
    u2 = 1.0 - q[:, 0] - q[:, 2]
    u12 = 1.0 - q.sum(axis=1)
    if np.any(u12 <= 0):
        raise DomainError("clone pair law left the open simplex")
    P1 = math.exp(_log_miss(q[:, 0] + q[:, 1], mult))
    P2 = math.exp(_log_miss(q[:, 0] + q[:, 2], mult))
    P12 = math.exp(_log_miss(q.sum(axis=1), mult))
    st = _PairState(q, 1.0 - P1 - P2 + P12, P2 - P12, P1 - P12, P12)
    return st, P1 / u1, P2 / u2


def _pair_multipliers(st: _PairState, P1h: np.ndarray, P2h: np.ndarray, w: np.ndarray) -> np.ndarray:
    o11, o1s, os1 = w

    def part(o, p, s):
        return o * p / s if o > 0 else 0.0 * p

    m_rr = np.full_like(P1h, o11 / st.s11)
    m_rc = part(o11, 1.0 - P2h, st.s11) + part(o1s, P2h, st.s1s)
    m_cr = part(o11, 1.0 - P1h, st.s11) + part(os1, P1h, st.ss1)
    return np.column_stack([m_rr, m_rc, m_cr])


def solve_pair_block(cls: np.ndarray, mult: np.ndarray, omega_t: np.ndarray, tol: float,
                     max_iter: int) -> Tuple[_PairState, float]:
    """Clone law over (rr, rc, cr) for the cells (1,1), (1,*), (*,1), (*,*) by the fixed point q = omega / M(q)."""
    o11, o1s, os1 = omega_t[ONE, ONE], omega_t[ONE, STAR], omega_t[STAR, ONE]
    if o11 <= 0:
        raise DomainError("literal joint has no (1,1) mass but red-red clones")
    target = cls[:, :3]
    q = np.column_stack([target[:, 0] / o11, target[:, 1] / (o11 + o1s), target[:, 2] / (o11 + os1)])
    res = math.inf
    for _ in range(max_iter):
        st, P1h, P2h = _pair_state(q, mult)
        if min(st.s11, st.sss) <= 0 or (o1s > 0 and st.s1s <= 0) or (os1 > 0 and st.ss1 <= 0):
            raise DomainError("occupancy cell probability left (0, 1)")
        M = _pair_multipliers(st, P1h, P2h, (o11, o1s, os1))
        res = float(np.max(np.abs(q * M - target)))
        if res <= tol:
            return st, res
        q = target / M
    raise ConvergenceError("clone pair law did not converge in %d iterations" % max_iter, res)


def occupancy_term(omega_t: np.ndarray, cls: np.ndarray, mult: np.ndarray, tol: float,
                   max_iter: int) -> float:
    """f_occ,t for one literal type; cls holds the clone class masses (R, 5)."""
    if cls.shape[0] == 0:
        return 0.0
    o = omega_t
    q_ry, s10, lm10 = _red_block(cls[:, RY], o[ONE, ZERO], mult, "occupancy (1,0)")
    q_yr, s01, lm01 = _red_block(cls[:, YR], o[ZERO, ONE], mult, "occupancy (0,1)")
    term = xlogy(o[ONE, ZERO], s10) + o[STAR, ZERO] * lm10 + xlogy(o[ZERO, ONE], s01) + o[ZERO, STAR] * lm01

    py = o[ONE, ZERO] + o[STAR, ZERO]
    yp = o[ZERO, ONE] + o[ZERO, STAR]
    pp = o[ONE, ONE] + o[ONE, STAR] + o[STAR, ONE] + o[STAR, STAR]
    kl = rel_entr(cls[:, RY], py * q_ry) + rel_entr(py - cls[:, RY], py * (1.0 - q_ry))
    kl += rel_entr(cls[:, YR], yp * q_yr) + rel_entr(yp - cls[:, YR], yp * (1.0 - q_yr))

    if np.any(cls[:, :3] > 0):
        st, _ = solve_pair_block(cls, mult, o, tol, max_iter)
        term += (xlogy(o[ONE, ONE], st.s11) + xlogy(o[ONE, STAR], st.s1s)
                 + xlogy(o[STAR, ONE], st.ss1) + xlogy(o[STAR, STAR], st.sss))
        q = st.q
        rest = pp - cls[:, :3].sum(axis=1)
        kl += rel_entr(cls[:, :3], pp * q).sum(axis=1) + rel_entr(rest, pp * (1.0 - q.sum(axis=1)))
    elif o[ONE, ONE] + o[ONE, STAR] + o[STAR, ONE] > 0:
        raise DomainError("a true literal without red clones")
    return float(term + np.sum(mult * kl))


# ------------- f -------------

@dataclass
class SecondMomentParts:
    entropy: float
    discrepancy: float
    validity: float
    occupancy: float
    residual: float

    @property
    def total(self) -> float:
        return self.entropy + self.discrepancy + self.validity + self.occupancy


def evaluate_parts(ts: TypeSystem, x: np.ndarray, tol: float, *, max_iter: Optional[int] = None,
                   damping: Optional[float] = None) -> SecondMomentParts:
    max_iter = config.MAX_ITER if max_iter is None else max_iter
    damping = config.DAMPING if damping is None else damping
    lay = layout_for(ts)
    density = float(ts.density)
    lit = literal_joint(lay, x)
    pi_t = np.array([float(w) for w in ts.literal_weights])
    if np.any(lit < -AFFINE_SLACK):
        raise DomainError("negative literal overlap entry")
    lit = np.clip(lit, 0.0, None)

    entropy = float(np.sum(pi_t * entr(lit).sum(axis=(1, 2))))

    disc = 0.0
    val = 0.0
    residual = 0.0
    for c, ct, w in zip(lay.clauses, ts.clause_types, ts.clause_weights):
        omega = slot_joint(c, x)
        gam = clause_classes(c, x)
        if np.any(omega <= 0) or np.any(gam.flat() < 0):
            raise DomainError("clause overlap outside the open simplex")
        agg = np.stack([aggregate(lit[t]) for t, _ in ct.slots])
        disc -= float(w) * float(np.sum(rel_entr(omega, agg)))
        q, res, _ = solve_slot_law(omega, gam, tol, max_iter, damping)
        residual = max(residual, res)
        val += float(w) * validity_term(omega, gam, q)

    occ = 0.0
    for g, (cls, mult) in enumerate(clone_classes(ts, x)):
        occ += 2.0 * pi_t[g] * occupancy_term(lit[g], cls, mult, tol, max_iter)

    return SecondMomentParts(entropy, density * disc, density * val, occ, residual)


def second_moment_f(ts: TypeSystem, ov: Overlap, tol: Optional[float] = None, *,
                    fallback: bool = False) -> RateResult:
    """f at the overlap ov. With fallback, points outside the solvable region report f-hat instead."""
    tol = config.TOL if tol is None else tol
    ts.require_explicit("second_moment_f")
    if ov.layout is not layout_for(ts):
        raise ValidationError("overlap was built for another type system")
    report = check_affine(ts, ov, slack=0 if ov.exact else AFFINE_SLACK)
    if not report.ok:
        raise ValidationError("overlap violates %d affine relations (max residual %.3e)"
                              % (len(report.violations), float(report.max_residual)))
    x = ov.vector()
    try:
        parts = evaluate_parts(ts, x, tol)
    except (DomainError, ConvergenceError) as e:
        if not fallback:
            raise
        log.warning("second moment outside the solvable region (%s); reporting f-hat", e)
        fh = fhat_at(ts, ov)
        return RateResult(rate=fh, components={"fhat": fh}, fallback="rough")
    comps: Dict[str, float] = {"ent": parts.entropy, "disc": parts.discrepancy,
                               "val": parts.validity, "occ": parts.occupancy}
    return RateResult(rate=parts.total, components=comps, residuals={"second_moment": parts.residual})


def f_at(ts: TypeSystem, x: np.ndarray, tol: Optional[float] = None) -> float:
    """f at a raw coordinate vector, skipping the affine check (finite differences)."""
    return evaluate_parts(ts, x, config.TOL if tol is None else tol).total

