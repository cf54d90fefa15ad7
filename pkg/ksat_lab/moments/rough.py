"""Rough upper bounds on the second moment away from the product overlap.

fhat(omega) = sum_t pi_t H(omega_t) + (m/n) sum_l pi_l ln[1 - 2 prod_j l_j^y + prod_j omega_(l,j)^yy]
drops the occupancy and the clause-class structure. psi(O, gamma) is the
cruder bound on the symmetric overlap matrix O of two literal maps.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import entr, rel_entr

from .. import config
from ..errors import DomainError, ValidationError
from ..sp import TypeSystem
from ..util.infotheory import binary_entropy
from .overlap import YY, Overlap, layout_for, literal_joint, slot_joint

log = logging.getLogger("ksat-lab.moments")


# ------------- f-hat -------------

def _clause_log(yellow: np.ndarray, omega_yy: np.ndarray) -> np.ndarray:
    inner = 1.0 - 2.0 * yellow.prod(axis=-1) + omega_yy.prod(axis=-1)
    if np.any(inner <= 0):
        raise DomainError("f-hat clause term left the log domain")
    return np.log(inner)


def rough_bound_fhat(ts: TypeSystem, alpha: float) -> float:
    """f-hat along omega_t(alpha) = (1 - alpha) diag(t) + alpha t x t; alpha = 1 is the product overlap."""
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("alpha must lie in [0, 1], got %r" % alpha)
    lt = ts.literal_table()
    t = np.column_stack([lt.p1, lt.p0, lt.pstar])
    joint = alpha * t[:, :, None] * t[:, None, :] + (1.0 - alpha) * t[:, :, None] * np.eye(3)[None]
    value = float(np.sum(lt.weight * entr(joint).sum(axis=(1, 2))))
    clause = 0.0
    for b in ts.clause_blocks():
        y = b.yellow
        if np.any(y < 0) or np.any(y > 1):
            raise DomainError("yellow slot mass outside [0, 1]")
        clause += float(np.sum(b.weight * _clause_log(y, (1.0 - alpha) * y + alpha * y * y)))
    return value + float(ts.density) * clause


def fhat_at(ts: TypeSystem, ov: Overlap) -> float:
    lay = layout_for(ts)
    x = ov.vector()
    lit = literal_joint(lay, x)
    value = float(sum(float(w) * entr(np.clip(lit[g], 0.0, None)).sum() for g, w in enumerate(ts.literal_weights)))
    clause = 0.0
    for c, ct, w in zip(lay.clauses, ts.clause_types, ts.clause_weights):
        y = np.array([1.0 - float(d.purple) for d in ct.dists])
        yy = slot_joint(c, x)[:, YY]
        if np.any(yy < 0) or np.any(yy > y + 1e-15):
            raise DomainError("omega^yy outside [0, l^y]")
        clause += float(w) * float(_clause_log(y, yy))
    return value + float(ts.density) * clause


@dataclass
class FhatScan:
    alphas: List[float]
    values: List[float]

    @property
    def max_value(self) -> float:
        return max(self.values)

    def rows(self) -> List[list]:
        return [[a, v] for a, v in zip(self.alphas, self.values)]

    def to_dict(self) -> dict:
        return {"max": self.max_value, "points": [{"alpha": a, "fhat": v} for a, v in zip(self.alphas, self.values)]}


def fhat_scan(ts: TypeSystem, alphas: Sequence[float]) -> FhatScan:
    alphas = [float(a) for a in alphas]
    return FhatScan(alphas, [rough_bound_fhat(ts, a) for a in alphas])


# ------------- psi -------------

@dataclass(frozen=True)
class PsiInput:
    """Free overlap entries O^10, O^1* and gamma in (yy, rg, ry, gr, yr, cc) order."""
    o10: float
    o1s: float
    gamma: Tuple[float, float, float, float, float, float]


GAMMA_NAMES = ("yy", "rg", "ry", "gr", "yr", "cc")


def overlap_matrix(k: int, o10: float, o1s: float) -> np.ndarray:
    """O over (1, 0, *)^2 from its two free entries."""
    half = 0.5 - 2.0 ** (-k - 1)
    diag = half - o10 - o1s
    ss = 2.0 ** (-k) - 2.0 * o1s
    O = np.array([[diag, o10, o1s],
                  [o10, diag, o1s],
                  [o1s, o1s, ss]])
    if np.any(O < 0) or np.any(O > 1):
        raise ValidationError("overlap entries outside [0, 1] for O^10=%r O^1*=%r" % (o10, o1s))
    return O


def g_vector(k: int, O: np.ndarray) -> np.ndarray:
    """g(O) in (yy, rg, ry, gr, yr, cc) order."""
    o11, o10, o1s = O[0]
    o01, o00, o0s = O[1]
    os1, os0, oss = O[2]
    z_row = o01 + o00 + o0s
    z_col = o10 + o00 + os0
    s_row = os1 + os0 + oss
    s_col = o1s + o0s + oss
    yy = k * (k - 1) * o10 * o01 * o00 ** (k - 2)
    rg = k * o1s * (z_row ** (k - 1) - o00 ** (k - 1))
    ry = k * o10 * (z_row ** (k - 1) - o00 ** (k - 1) - (k - 1) * (o01 + o0s) * o00 ** (k - 2))
    cc = (1.0 - z_row ** k - z_col ** k - k * s_row * z_row ** (k - 1) - k * s_col * z_col ** (k - 1) + o00 ** k
          + k * os0 * o00 ** (k - 1) + k * o0s * o00 ** (k - 1) + k * oss * o00 ** (k - 1)
          + k * (k - 1) * os0 * o0s * o00 ** (k - 2))
    return np.array([yy, rg, ry, rg, ry, cc])


def gamma_lower_bounds(k: int, r: float, O: np.ndarray) -> List[Tuple[str, Tuple[int, ...], float]]:
    slack = 8.0 ** (-k)
    return [("yy+ry", (0, 2), 2.0 / r * O[0, 1] - slack),
            ("yy+yr", (0, 4), 2.0 / r * O[1, 0] - slack),
            ("rg", (1,), 2.0 / r * O[0, 2] - slack),
            ("gr", (3,), 2.0 / r * O[2, 0] - slack)]


def check_gamma(k: int, r: float, O: np.ndarray, gamma: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    g = np.asarray(gamma, dtype=float)
    if g.shape != (6,):
        raise ValidationError("gamma needs 6 entries (yy, rg, ry, gr, yr, cc)")
    if np.any(g < -tol):
        raise ValidationError("gamma has negative entries")
    if abs(float(g.sum()) - 1.0) > tol:
        raise ValidationError("gamma sums to %.17g, not 1" % g.sum())
    for name, idx, lo in gamma_lower_bounds(k, r, O):
        if float(g[list(idx)].sum()) < lo - tol:
            raise ValidationError("gamma violates the %s lower bound (%.6g < %.6g)" % (name, g[list(idx)].sum(), lo))
    return np.clip(g, 0.0, None)


def _psi(k: int, r: float, O: np.ndarray, gamma: np.ndarray) -> float:
    g = g_vector(k, O)
    if np.any((gamma > 0) & (g <= 0)):
        return -math.inf
    kl = float(np.sum(rel_entr(gamma, g)))
    return float(entr(O).sum()) - (1.0 - 8.0 ** (-k)) * r * kl + 2.0 ** (-k) * O[0, 0]


def separability_psi(k: int, r: float, inp: PsiInput) -> float:
    O = overlap_matrix(k, inp.o10, inp.o1s)
    gamma = check_gamma(k, r, O, inp.gamma)
    return _psi(k, r, O, gamma)


@dataclass
class PsiSup:
    value: float
    gamma: Tuple[float, ...]
    success: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "gamma": dict(zip(GAMMA_NAMES, self.gamma)), "success": self.success}


def sup_psi(k: int, r: float, o10: float, o1s: float) -> PsiSup:
    """sup of psi over Gamma(O) by SLSQP, started at the lower bounds with the rest in cc."""
    O = overlap_matrix(k, o10, o1s)
    bounds = gamma_lower_bounds(k, r, O)
    x0 = np.zeros(6)
    x0[2] = max(0.0, bounds[0][2])
    x0[4] = max(0.0, bounds[1][2])
    x0[1] = max(0.0, bounds[2][2])
    x0[3] = max(0.0, bounds[3][2])
    x0[5] = 1.0 - x0[:5].sum()
    if x0[5] < 0:
        raise ValidationError("Gamma(O) is empty for O^10=%r O^1*=%r" % (o10, o1s))
    cons = [{"type": "eq", "fun": lambda x: x.sum() - 1.0}]
    for _, idx, lo in bounds:
        cons.append({"type": "ineq", "fun": lambda x, idx=idx, lo=lo: x[list(idx)].sum() - lo})

    def neg(x):
        val = _psi(k, r, O, np.clip(x, 0.0, None))
        return 1e6 if not math.isfinite(val) else -val

    sol = minimize(neg, x0, method="SLSQP", bounds=[(0.0, 1.0)] * 6, constraints=cons,
                   options={"ftol": 1e-14, "maxiter": 500})
    best = np.clip(sol.x, 0.0, None)
    value = _psi(k, r, O, best)
    start = _psi(k, r, O, x0)
    if start > value:
        best, value = x0, start
    if not sol.success:
        log.warning("sup psi: SLSQP stopped early (%s)", sol.message)
    return PsiSup(value, tuple(float(v) for v in best), bool(sol.success))


def boundary_psi(k: int, r: float) -> float:
    """psi at Delta(O) = 0 with all clauses (c, c).

    Expands to (2 - ln 2 + (r_main - r)) 2^-k + O(k^2 4^-k), with r_main = 2^k ln2 - (1 + ln2)/2.
    """
    O = overlap_matrix(k, 0.0, 0.0)
    return _psi(k, r, O, np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]))


@dataclass
class BoundaryCheck:
    k: int
    r: float
    psi: float
    target: float
    tolerance: float

    @property
    def deviation(self) -> float:
        return self.psi - self.target

    @property
    def within(self) -> bool:
        return bool(abs(self.deviation) <= self.tolerance)

    def to_dict(self) -> dict:
        return {"psi": self.psi, "eps_k_2mk": self.target, "deviation": self.deviation,
                "tolerance": self.tolerance, "within": self.within}


def boundary_check(k: int, r: float) -> BoundaryCheck:
    """boundary_psi against eps_k 2^-k within k^2 4^-k; a miss is logged, not raised."""
    chk = BoundaryCheck(k, float(r), boundary_psi(k, r), config.eps_k(k) * 2.0 ** (-k), k * k * 4.0 ** (-k))
    if not chk.within:
        log.warning("boundary psi k=%d r=%.6g: %.6g is %.3g from eps_k 2^-k (tolerance %.3g)",
                    k, r, chk.psi, chk.deviation, chk.tolerance)
    return chk


# ------------- Middle ground -------------

def middle_ground_bound(k: int, r: float, y: np.ndarray) -> np.ndarray:
    """H(y) + r ln[1 - 2^(1-k) + ((1-y)/2)^k]."""
    y = np.asarray(y, dtype=float)
    return binary_entropy(y) + r * np.log1p(-(2.0 ** (1 - k)) + ((1.0 - y) / 2.0) ** k)


@dataclass
class MiddleGroundScan:
    k: int
    r: float
    max_value: float
    argmax: float
    ys: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def rows(self) -> List[list]:
        return [[float(y), float(v)] for y, v in zip(self.ys, self.values)]

    def to_dict(self) -> dict:
        return {"k": self.k, "r": self.r, "max": self.max_value, "argmax": self.argmax, "grid": int(len(self.ys))}


def middle_ground_window(k: int) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    return (2.0 ** (-0.99 * k), 0.5 - 2.0 ** (-0.49 * k)), (0.5 + 2.0 ** (-0.49 * k), 1.0)


def scan_middle_ground(k: int, r: float, grid: int = 10000) -> MiddleGroundScan:
    if grid < 2:
        raise ValidationError("grid needs at least 2 points")
    (a0, a1), (b0, b1) = middle_ground_window(k)
    ys = np.concatenate([np.linspace(a0, a1, grid // 2), np.linspace(b0, b1, grid - grid // 2)])
    vals = middle_ground_bound(k, r, ys)
    i = int(np.argmax(vals))
    log.info("middle ground k=%d r=%.6g: max %.6g at y=%.6g", k, r, vals[i], ys[i])
    return MiddleGroundScan(k, float(r), float(vals[i]), float(ys[i]), ys, vals)
