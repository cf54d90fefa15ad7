"""Finite-difference checks of f around the product overlap.

Derivatives are taken in the unit-scaled coordinates z of the feasible
subspace (FeasibleBasis), so every direction respects the affine relations.
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .. import config
from ..formula import make_rng
from ..sp import TypeSystem
from ..util.parallel import pmap
from .overlap import CR, RC, RR, YY, FeasibleBasis, clause_classes, feasible_basis, layout_for, slot_joint
from .second import f_at

log = logging.getLogger("ksat-lab.moments")


# ------------- Tameness -------------

@dataclass
class TameReport:
    tame: bool
    deviations: Dict[str, float]
    windows: Dict[str, float]

    def to_dict(self) -> dict:
        return {"tame": self.tame, "deviations": self.deviations, "windows": self.windows}


def _rel(x: np.ndarray, ref: np.ndarray) -> float:
    mask = ref > 0
    return float(np.max(np.abs(x[mask] / ref[mask] - 1.0), initial=0.0))


def is_tame(ts: TypeSystem, x: np.ndarray) -> TameReport:
    """TM1 slot yy cells near the product value; TM2-TM4 red class masses within a relative window."""
    lay = layout_for(ts)
    center = feasible_basis(ts).center
    k = ts.k
    dev = {"yy_slot": 0.0, "rc_cr": 0.0, "yy_class": 0.0, "rr": 0.0}
    for c in lay.clauses:
        dev["yy_slot"] = max(dev["yy_slot"], float(np.max(np.abs(slot_joint(c, x)[:, YY] - slot_joint(c, center)[:, YY]))))
        g, g0 = clause_classes(c, x), clause_classes(c, center)
        dev["rc_cr"] = max(dev["rc_cr"], _rel(g.rc, g0.rc), _rel(g.cr, g0.cr))
        dev["yy_class"] = max(dev["yy_class"], _rel(g.yy, g0.yy))
        dev["rr"] = max(dev["rr"], _rel(g.rr, g0.rr))
    red_window = 2.0 ** (-k / 4.0)
    windows = {"yy_slot": float(k) ** -4, "rc_cr": red_window, "yy_class": red_window, "rr": red_window}
    return TameReport(all(dev[n] <= windows[n] for n in dev), dev, windows)


# ------------- Stationarity -------------

@dataclass
class StationaryReport:
    max_abs: float
    gradient: np.ndarray
    dim: int
    h_step: float
    shift: float = 0.0

    def to_dict(self) -> dict:
        return {"max_abs": self.max_abs, "gradient": self.gradient, "dim": self.dim,
                "h_step": self.h_step, "shift": self.shift}


def _f_z(ts: TypeSystem, fb: FeasibleBasis, tol: float):
    def f(z: np.ndarray) -> float:
        return f_at(ts, fb.point(z), tol)
    return f


def check_stationary(ts: TypeSystem, h_step: float = 1e-5, shift: Optional[float] = None,
                     tol: Optional[float] = None) -> StationaryReport:
    """Central differences of f along each feasible direction at the product overlap (moved by `shift`)."""
    tol = config.TOL if tol is None else tol
    fb = feasible_basis(ts)
    D = fb.dim
    z0 = np.zeros(D)
    if shift:
        z0 = z0 + shift / np.sqrt(D)
    f = _f_z(ts, fb, tol)
    eye = np.eye(D)
    pts = [z0 + h_step * eye[i] for i in range(D)] + [z0 - h_step * eye[i] for i in range(D)]
    vals = np.array(pmap(f, pts))
    grad = (vals[:D] - vals[D:]) / (2.0 * h_step)
    max_abs = float(np.max(np.abs(grad))) if D else 0.0
    log.info("stationarity: max |Df| = %.3e over %d directions (shift %g)", max_abs, D, shift or 0.0)
    return StationaryReport(max_abs, grad, D, h_step, float(shift or 0.0))


# ------------- Concavity -------------

def hessian(f, z0: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian: 1 + 2D + 4 C(D, 2) evaluations."""
    D = len(z0)
    eye = np.eye(D)
    pts = [z0]
    pts += [z0 + s * h * eye[i] for i in range(D) for s in (1.0, -1.0)]
    pairs = list(itertools.combinations(range(D), 2))
    pts += [z0 + h * (si * eye[i] + sj * eye[j]) for i, j in pairs for si in (1.0, -1.0) for sj in (1.0, -1.0)]
    vals = pmap(f, pts)
    f0 = vals[0]
    H = np.empty((D, D))
    for i in range(D):
        H[i, i] = (vals[1 + 2 * i] - 2.0 * f0 + vals[2 + 2 * i]) / (h * h)
    base = 1 + 2 * D
    for n, (i, j) in enumerate(pairs):
        pp, pm, mp, mm = vals[base + 4 * n: base + 4 * n + 4]
        H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
    return H


@dataclass
class ConcavityReport:
    max_eigenvalue: float
    sample_max: List[float]
    product_eigenvalues: np.ndarray
    rayleigh: Dict[str, float]
    dim: int
    radius: float
    untame: int = 0
    samples: int = 0
    tame_reports: List[TameReport] = field(default_factory=list, repr=False)

    @property
    def negative_definite(self) -> bool:
        return self.max_eigenvalue < 0

    def to_dict(self) -> dict:
        return {"max_eigenvalue": self.max_eigenvalue, "negative_definite": self.negative_definite,
                "sample_max": self.sample_max, "product_eigenvalues": self.product_eigenvalues,
                "rayleigh": self.rayleigh, "dim": self.dim, "radius": self.radius,
                "samples": self.samples, "untame": self.untame}


def _group_rayleigh(ts: TypeSystem, fb: FeasibleBasis, H: np.ndarray) -> Dict[str, float]:
    """Curvature of f, in overlap units, along the feasible direction closest to moving one group of coordinates."""
    lay = layout_for(ts)
    groups: Dict[str, List[int]] = {"omega_literal": sorted(set(lay.literal.ravel().tolist())),
                                    "omega_pp": [], "gamma_rr": [], "gamma_rc_cr": []}
    for c in lay.clauses:
        groups["omega_pp"] += c.slot[:, 0].tolist()
        groups["gamma_rr"] += c.gamma[:, RR].tolist()
        groups["gamma_rc_cr"] += c.gamma[:, RC].tolist() + c.gamma[:, CR].tolist()
    M = fb.scale[:, None] * fb.basis
    out = {}
    for name, idx in groups.items():
        u = np.zeros(lay.size)
        u[sorted(set(idx))] = 1.0
        z = np.linalg.lstsq(M, u, rcond=None)[0]
        a = M @ z
        norm = float(a @ a)
        out[name] = float(z @ H @ z / norm) if norm > 1e-24 else float("nan")
    return out


def check_concavity(ts: TypeSystem, n_samples: int = 8, radius: float = 1e-3, *, seed: int = 0,
                    h_step: float = 1e-4, tol: Optional[float] = None) -> ConcavityReport:
    """Hessian spectra at the product overlap and at tame points on the sphere |z| = radius around it."""
    tol = config.TOL if tol is None else tol
    fb = feasible_basis(ts)
    D = fb.dim
    f = _f_z(ts, fb, tol)
    H0 = hessian(f, np.zeros(D), h_step)
    eig0 = np.linalg.eigvalsh(H0)
    rng = make_rng(seed)
    sample_max: List[float] = []
    reports: List[TameReport] = []
    untame = 0
    for _ in range(n_samples):
        z = rng.standard_normal(D)
        z *= radius / np.linalg.norm(z)
        tr = is_tame(ts, fb.point(z))
        reports.append(tr)
        if not tr.tame:
            untame += 1
            log.warning("concavity sample outside the tame windows: %s", tr.deviations)
            continue
        sample_max.append(float(np.linalg.eigvalsh(hessian(f, z, h_step)).max()))
    worst = max([float(eig0.max())] + sample_max)
    rq = _group_rayleigh(ts, fb, H0)
    log.info("concavity: max eigenvalue %.3e over %d samples (product max %.3e)", worst, len(sample_max), eig0.max())
    return ConcavityReport(worst, sample_max, eig0, rq, D, radius, untame, n_samples, reports)
