"""The overlap (omega, gamma) of two shades on an explicit type system.

All coordinates live in one flat vector described by a Layout:

- every literal type t carries the joint omega_t over (1, 0, *) x (1, 0, *);
- every clause slot (l, j) carries the joint omega_(l,j) over
  (pp, py, yp, yy), p meaning purple and y yellow;
- every clause type l carries the class masses gamma: rr, rc, cr, ry, yr per
  slot, yy per ordered pair of distinct slots, and cc.

The clone level omega_(t,h) is not a coordinate; it is the linear image of
gamma under the type graph (clone_classes). On exchangeable systems all slots
of a clause type share one block of coordinates.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import null_space

from ..errors import ValidationError
from ..sp import TypeSystem

log = logging.getLogger("ksat-lab.moments")

Number = Union[Fraction, float]

ONE, ZERO, STAR = 0, 1, 2
Z_LABELS = ("1", "0", "*")
FLIP = (ZERO, ONE, STAR)
PURPLE = (ONE, STAR)

CELLS = ("pp", "py", "yp", "yy")
PP, PY, YP, YY = range(4)
CLASSES = ("rr", "rc", "cr", "ry", "yr")
RR, RC, CR, RY, YR = range(5)


# ------------- Layout -------------

@dataclass
class ClauseCoords:
    slot: np.ndarray
    gamma: np.ndarray
    yy: np.ndarray
    cc: int

    @property
    def width(self) -> int:
        return int(self.slot.shape[0])


@dataclass
class Layout:
    literal: np.ndarray
    clauses: List[ClauseCoords]
    labels: List[str]
    exchangeable: bool
    clones: List[List[Tuple[int, int]]]
    _rows: Optional[List["AffineRow"]] = field(default=None, repr=False)
    _basis: Optional["FeasibleBasis"] = field(default=None, repr=False)
    _clone_map: Optional[Tuple[sparse.csr_matrix, List[int]]] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.labels)


def _build_layout(ts: TypeSystem) -> Layout:
    labels: List[str] = []

    def take(label: str) -> int:
        labels.append(label)
        return len(labels) - 1

    keys = [t.key for t in ts.literal_types]
    G = len(keys)
    literal = np.empty((G, 3, 3), dtype=int)
    for g in range(G):
        for z1 in range(3):
            for z2 in range(3):
                literal[g, z1, z2] = take("omega[%s][%s%s]" % (keys[g], Z_LABELS[z1], Z_LABELS[z2]))

    clauses = []
    for i, ct in enumerate(ts.clause_types):
        kappa = ct.width
        slot = np.empty((kappa, 4), dtype=int)
        gamma = np.empty((kappa, 5), dtype=int)
        yy = np.full((kappa, kappa), -1, dtype=int)
        off = ~np.eye(kappa, dtype=bool)
        if ts.exchangeable:
            slot[:] = [take("omega[C%d][%s]" % (i, c)) for c in CELLS]
            gamma[:] = [take("gamma[C%d][%s]" % (i, c)) for c in CLASSES]
            if kappa > 1:
                yy[off] = take("gamma[C%d][yy]" % i)
        else:
            for j in range(kappa):
                slot[j] = [take("omega[C%d,%d][%s]" % (i, j, c)) for c in CELLS]
                gamma[j] = [take("gamma[C%d,%d][%s]" % (i, j, c)) for c in CLASSES]
            for j in range(kappa):
                for jj in range(kappa):
                    if j != jj:
                        yy[j, jj] = take("gamma[C%d,%d,%d][yy]" % (i, j, jj))
        cc = take("gamma[C%d][cc]" % i)
        clauses.append(ClauseCoords(slot, gamma, yy, cc))

    clones: List[List[Tuple[int, int]]] = []
    for t in ts.literal_types:
        if t.degree == 0:
            clones.append([])
        elif ts.exchangeable:
            clones.append([(1, t.degree)])
        else:
            clones.append([(h, 1) for h in range(1, t.degree + 1)])
    return Layout(literal, clauses, labels, ts.exchangeable, clones)


def layout_for(ts: TypeSystem) -> Layout:
    ts.require_explicit("the overlap layout")
    if ts._overlap_layout is None:
        ts._overlap_layout = _build_layout(ts)
        log.debug("overlap layout: %d coordinates", ts._overlap_layout.size)
    return ts._overlap_layout


# ------------- Overlap -------------

@dataclass
class ClassMasses:
    """Per-clause class masses: rr..yr of shape (kappa,), yy (kappa, kappa) with zero diagonal, cc scalar."""
    rr: np.ndarray
    rc: np.ndarray
    cr: np.ndarray
    ry: np.ndarray
    yr: np.ndarray
    yy: np.ndarray
    cc: float

    def flat(self) -> np.ndarray:
        off = ~np.eye(self.yy.shape[0], dtype=bool)
        return np.concatenate([self.rr, self.rc, self.cr, self.ry, self.yr, self.yy[off], [self.cc]])


@dataclass
class Overlap:
    layout: Layout
    values: List[Number]

    def vector(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def moved(self, x: np.ndarray) -> "Overlap":
        if len(x) != self.layout.size:
            raise ValidationError("overlap vector has %d entries, layout needs %d" % (len(x), self.layout.size))
        return Overlap(self.layout, [float(v) for v in x])

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def to_dict(self) -> dict:
        return {"size": self.layout.size, "exchangeable": self.layout.exchangeable,
                "coordinates": dict(zip(self.layout.labels, self.values))}


def literal_joint(lay: Layout, x: np.ndarray) -> np.ndarray:
    return x[lay.literal]


def slot_joint(c: ClauseCoords, x: np.ndarray) -> np.ndarray:
    return x[c.slot]


def clause_classes(c: ClauseCoords, x: np.ndarray) -> ClassMasses:
    g = x[c.gamma]
    yy = np.where(c.yy >= 0, x[np.maximum(c.yy, 0)], 0.0)
    return ClassMasses(g[:, RR], g[:, RC], g[:, CR], g[:, RY], g[:, YR], yy, float(x[c.cc]))


def aggregate(omega_t: np.ndarray) -> np.ndarray:
    """Collapse a literal joint over (1, 0, *)^2 to the slot cells (pp, py, yp, yy)."""
    p = list(PURPLE)
    return np.array([omega_t[np.ix_(p, p)].sum(), omega_t[p, ZERO].sum(),
                     omega_t[ZERO, p].sum(), omega_t[ZERO, ZERO]])


def product_overlap(ts: TypeSystem) -> Overlap:
    """(omega-bar, gamma-bar): two independent shades. Exact on Fraction-valued systems."""
    lay = layout_for(ts)
    vals: List[Number] = [0] * lay.size
    for g, t in enumerate(ts.literal_types):
        tz = (t.signature.p1, t.signature.p0, t.signature.pstar)
        for z1 in range(3):
            for z2 in range(3):
                vals[lay.literal[g, z1, z2]] = tz[z1] * tz[z2]
    for c, ct in zip(lay.clauses, ts.clause_types):
        red = [d.pr for d in ct.dists]
        total = sum(red)
        for j, d in enumerate(ct.dists):
            p = d.purple
            y = 1 - p
            r = red[j]
            for cell, v in zip(range(4), (p * p, p * y, y * p, y * y)):
                vals[c.slot[j, cell]] = v
            ry = r * y - r * (total - r)
            for cls, v in zip(range(5), (r * r, r * (p - r), r * (p - r), ry, ry)):
                vals[c.gamma[j, cls]] = v
            for jj in range(c.width):
                if jj != j:
                    vals[c.yy[j, jj]] = r * red[jj]
        vals[c.cc] = (1 - total) ** 2
    return Overlap(lay, vals)


# ------------- Affine relations -------------

@dataclass
class AffineRow:
    name: str
    coef: Dict[int, Number]
    rhs: Number

    def residual(self, values: Sequence[Number]) -> Number:
        return sum(c * values[i] for i, c in self.coef.items()) - self.rhs


def affine_rows(ts: TypeSystem) -> List[AffineRow]:
    lay = layout_for(ts)
    if lay._rows is not None:
        return lay._rows
    rows: List[AffineRow] = []
    seen = set()

    def add(name: str, coef: Dict[int, Number], rhs: Number) -> None:
        coef = {i: c for i, c in coef.items() if c != 0}
        if not coef:
            if rhs != 0:
                raise ValidationError("inconsistent affine relation %s" % name)
            return
        key = (tuple(sorted(coef.items())), rhs)
        if key in seen:
            return
        seen.add(key)
        rows.append(AffineRow(name, coef, rhs))

    def acc(coef: Dict[int, Number], idx: int, c: Number) -> None:
        coef[idx] = coef.get(idx, 0) + c

    keys = [t.key for t in ts.literal_types]
    for g, t in enumerate(ts.literal_types):
        tz = (t.signature.p1, t.signature.p0, t.signature.pstar)
        for z in range(3):
            add("row %s %s" % (keys[g], Z_LABELS[z]), {int(i): 1 for i in lay.literal[g, z, :]}, tz[z])
            add("col %s %s" % (keys[g], Z_LABELS[z]), {int(i): 1 for i in lay.literal[g, :, z]}, tz[z])
        u = ts.neg[g]
        if g <= u:
            for z1 in range(3):
                for z2 in range(3):
                    coef: Dict[int, Number] = {}
                    acc(coef, int(lay.literal[u, z1, z2]), 1)
                    acc(coef, int(lay.literal[g, FLIP[z1], FLIP[z2]]), -1)
                    add("negation %s %s%s" % (keys[g], Z_LABELS[z1], Z_LABELS[z2]), coef, 0)

    for i, (c, ct) in enumerate(zip(lay.clauses, ts.clause_types)):
        for j, d in enumerate(ct.dists):
            p = d.purple
            s = c.slot[j]
            add("slot C%d,%d p." % (i, j), {int(s[PP]): 1, int(s[PY]): 1}, p)
            add("slot C%d,%d .p" % (i, j), {int(s[PP]): 1, int(s[YP]): 1}, p)
            add("slot C%d,%d y." % (i, j), {int(s[YP]): 1, int(s[YY]): 1}, 1 - p)
            add("slot C%d,%d .y" % (i, j), {int(s[PY]): 1, int(s[YY]): 1}, 1 - p)
            first: Dict[int, Number] = {}
            second: Dict[int, Number] = {}
            for cls in (RR, RC, RY):
                acc(first, int(c.gamma[j, cls]), 1)
            for cls in (RR, CR, YR):
                acc(second, int(c.gamma[j, cls]), 1)
            for jj in range(c.width):
                if jj != j:
                    acc(first, int(c.yy[j, jj]), 1)
                    acc(second, int(c.yy[jj, j]), 1)
            add("red C%d,%d first" % (i, j), first, d.pr)
            add("red C%d,%d second" % (i, j), second, d.pr)
        total: Dict[int, Number] = {}
        for idx in c.gamma.ravel():
            acc(total, int(idx), 1)
        for idx in c.yy[c.yy >= 0]:
            acc(total, int(idx), 1)
        acc(total, c.cc, 1)
        add("gamma C%d total" % i, total, 1)

    purple = list(PURPLE)
    agg_cells = {
        PP: [(a, b) for a in purple for b in purple],
        PY: [(a, ZERO) for a in purple],
        YP: [(ZERO, b) for b in purple],
    }
    for g, reps in enumerate(lay.clones):
        for h, _ in reps:
            partners = ts.partners(g, h)
            if not partners:
                continue
            for cell, cells in agg_cells.items():
                coef = {}
                for li, j, w in partners:
                    acc(coef, int(lay.clauses[li].slot[j, cell]), w)
                for z1, z2 in cells:
                    acc(coef, int(lay.literal[g, z1, z2]), -1)
                add("flow %s@%d %s" % (keys[g], h, CELLS[cell]), coef, 0)

    lay._rows = rows
    log.debug("%d affine relations on %d coordinates", len(rows), lay.size)
    return rows


@dataclass
class AffineReport:
    ok: bool
    max_residual: Number
    violations: List[Tuple[str, Number]]
    negative: List[str]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "max_residual": self.max_residual,
                "violations": [{"relation": n, "residual": r} for n, r in self.violations],
                "negative": self.negative}


def check_affine(ts: TypeSystem, ov: Overlap, slack: Number = 0) -> AffineReport:
    """Every affine relation within `slack` and every entry >= -slack; exact on Fraction overlaps."""
    worst: Number = 0
    violations = []
    for row in affine_rows(ts):
        res = abs(row.residual(ov.values))
        worst = max(worst, res)
        if res > slack:
            violations.append((row.name, res))
    negative = [lab for lab, v in zip(ov.layout.labels, ov.values) if v < -slack]
    return AffineReport(not violations and not negative, worst, violations, negative)


# ------------- Feasible subspace -------------

@dataclass
class FeasibleBasis:
    """x(z) = center + scale * (basis @ z); basis has orthonormal columns spanning the affine null space."""
    center: np.ndarray
    scale: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def point(self, z: np.ndarray) -> np.ndarray:
        return self.center + self.scale * (self.basis @ z)


def feasible_basis(ts: TypeSystem) -> FeasibleBasis:
    lay = layout_for(ts)
    if lay._basis is None:
        rows = affine_rows(ts)
        A = np.zeros((len(rows), lay.size))
        for r, row in enumerate(rows):
            for idx, c in row.coef.items():
                A[r, idx] = float(c)
        center = product_overlap(ts).vector()
        scale = np.abs(center)
        scale[scale == 0] = 1.0
        B = null_space(A * scale[None, :])
        lay._basis = FeasibleBasis(center, scale, B)
        log.info("feasible subspace: dimension %d of %d coordinates (%d relations)", B.shape[1], lay.size, len(rows))
    return lay._basis


# ------------- Clone level -------------

def _clone_map(ts: TypeSystem, lay: Layout) -> Tuple[sparse.csr_matrix, List[int]]:
    if lay._clone_map is None:
        data: List[float] = []
        ri: List[int] = []
        ci: List[int] = []
        offsets = []
        row = 0
        for g, reps in enumerate(lay.clones):
            offsets.append(row)
            for h, _ in reps:
                for li, j, w in ts.partners(g, h):
                    c = lay.clauses[li]
                    wf = float(w)
                    for cls in range(5):
                        ri.append(row + cls)
                        ci.append(int(c.gamma[j, cls]))
                        data.append(wf)
                    for jj in range(c.width):
                        if jj != j:
                            ri.append(row + RY)
                            ci.append(int(c.yy[j, jj]))
                            data.append(wf)
                            ri.append(row + YR)
                            ci.append(int(c.yy[jj, j]))
                            data.append(wf)
                row += 5
        offsets.append(row)
        mat = sparse.csr_matrix((data, (ri, ci)), shape=(row, lay.size))
        lay._clone_map = (mat, offsets)
    return lay._clone_map


def clone_classes(ts: TypeSystem, x: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Per literal type: clone class masses (R, 5) in rr, rc, cr, ry, yr order and multiplicities (R,)."""
    lay = layout_for(ts)
    mat, offsets = _clone_map(ts, lay)
    flat = mat @ x
    out = []
    for g, reps in enumerate(lay.clones):
        block = flat[offsets[g]:offsets[g + 1]].reshape(-1, 5)
        out.append((block, np.array([m for _, m in reps], dtype=float)))
    return out
