"""Survey Propagation signatures, the clone colour map Lambda, and type systems.

A signature is the SP marginal of a literal over {1, 0, *}; it depends only
on the degree difference delta = d_l - d_notl. Lambda turns the signatures of
one clause into colour distributions (r, b, g, y) for each of its slots. A
TypeSystem groups literals and clauses of a pruned formula by those
distributions; it can also be built analytically (regular systems, degree
ensembles) where only numeric tables exist.

Concrete systems keep exact Fractions throughout. Ensembles are float tables.
"""
from __future__ import annotations
import hashlib
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from . import config
from .cover import BLUE, GREEN, RED, YELLOW, Shade, Verdict, clone_layout
from .errors import DomainError, ValidationError
from .formula import Formula, degree_profile, make_rng
from .pruning import Number as DensityLike, as_fraction, check_degree_bounds
from .util.parallel import chunked, pmap
from .util.products import excl1

log = logging.getLogger("ksat-lab.sp")

Number = Union[Fraction, float]

MODE_FULL = "full"
MODE_DEGREE_PAIR = "degree-pair"
MODES = (MODE_FULL, MODE_DEGREE_PAIR)

CLAUSE_CHUNK = 256


def _is_one(total: Number) -> bool:
    if isinstance(total, Fraction):
        return total == 1
    return abs(float(total) - 1.0) <= 1e-14


def _ratio(x: Number) -> str:
    if isinstance(x, Fraction):
        return "%d/%d" % (x.numerator, x.denominator)
    return repr(float(x))


# ------------- Signatures and Lambda -------------

@dataclass(frozen=True)
class Signature:
    p1: Number
    p0: Number
    pstar: Number

    def __post_init__(self):
        if min(self.p1, self.p0, self.pstar) < 0 or not _is_one(self.p1 + self.p0 + self.pstar):
            raise DomainError("not a probability vector over {1,0,*}: (%s, %s, %s)" % (self.p1, self.p0, self.pstar))

    @property
    def purple(self) -> Number:
        return self.p1 + self.pstar

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p0": self.p0, "pstar": self.pstar}


@dataclass(frozen=True)
class CloneDistribution:
    pr: Number
    pb: Number
    pg: Number
    py: Number

    def __post_init__(self):
        if min(self.pr, self.pb, self.pg, self.py) < 0 or not _is_one(self.pr + self.pb + self.pg + self.py):
            raise DomainError("not a colour distribution: (%s, %s, %s, %s)" % (self.pr, self.pb, self.pg, self.py))

    @property
    def p1(self) -> Number:
        return self.pr + self.pb

    @property
    def p0(self) -> Number:
        return self.py

    @property
    def pstar(self) -> Number:
        return self.pg

    @property
    def purple(self) -> Number:
        return self.pr + self.pb + self.pg

    def mass(self, color: str) -> Number:
        return {RED: self.pr, BLUE: self.pb, GREEN: self.pg, YELLOW: self.py}[color]

    def fingerprint(self) -> str:
        return ",".join(_ratio(v) for v in (self.pr, self.pb, self.pg, self.py))

    def to_dict(self) -> dict:
        return {"r": self.pr, "b": self.pb, "g": self.pg, "y": self.py}


def regime_ok(k: int, delta: int) -> bool:
    """|delta| <= 2 k^3 2^(k/2), compared exactly."""
    return delta * delta <= 4 * k ** 6 * 2 ** k


def sp_marginal(k: int, delta: int) -> Signature:
    if k < 2:
        raise ValidationError("sp_marginal needs k >= 2, got %d" % k)
    if not regime_ok(k, delta):
        raise DomainError("delta=%d is outside the pruned regime for k=%d" % (delta, k))
    step = Fraction(delta, 2 ** (k + 1))
    tail = Fraction(1, 2 ** (k + 2))
    p1 = Fraction(1, 2) + step - tail
    p0 = Fraction(1, 2) - step - tail
    if p1 < 0 or p0 < 0:
        raise DomainError("signature for k=%d delta=%d leaves [0,1]" % (k, delta))
    return Signature(p1, p0, Fraction(1, 2 ** (k + 1)))


def lambda_map(signatures: Sequence[Signature], k: Optional[int] = None) -> List[CloneDistribution]:
    kappa = len(signatures)
    if kappa == 0:
        raise ValidationError("lambda_map needs at least one signature")
    if k is not None and kappa not in (k - 2, k - 1, k):
        raise ValidationError("clause width %d not in {k-2, k-1, k} for k=%d" % (kappa, k))
    out: List[CloneDistribution] = []
    for j, sig in enumerate(signatures):
        others = 1
        for jj, other in enumerate(signatures):
            if jj != j:
                others *= other.p0
        red = sig.purple * others
        blue = sig.p1 - red
        if blue < 0:
            raise DomainError("Lambda_b < 0 at slot %d (p1=%s, red=%s)" % (j, sig.p1, red))
        out.append(CloneDistribution(red, blue, sig.pstar, sig.p0))
    return out


def signature_arrays(k: int, delta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """Float (p1, p0, pstar) for an array of degree differences."""
    delta = np.asarray(delta, dtype=float)
    p1 = 0.5 + delta / 2.0 ** (k + 1) - 2.0 ** (-k - 2)
    p0 = 0.5 - delta / 2.0 ** (k + 1) - 2.0 ** (-k - 2)
    return p1, p0, 2.0 ** (-k - 1)


# ------------- Types -------------

@dataclass(frozen=True)
class LiteralType:
    d_pos: int
    d_neg: int
    signature: Signature
    clones: Tuple[CloneDistribution, ...]
    neg_clones: Tuple[CloneDistribution, ...]

    @property
    def degree(self) -> int:
        return self.d_pos

    @property
    def key(self) -> str:
        blob = "|".join(c.fingerprint() for c in self.clones) + "||" + "|".join(c.fingerprint() for c in self.neg_clones)
        return "L%d,%d:%s" % (self.d_pos, self.d_neg, hashlib.sha256(blob.encode()).hexdigest()[:12])

    def to_dict(self) -> dict:
        return {"key": self.key, "d_pos": self.d_pos, "d_neg": self.d_neg,
                "signature": self.signature, "clones": list(self.clones)}


@dataclass(frozen=True)
class ClauseType:
    slots: Tuple[Tuple[int, int], ...]
    dists: Tuple[CloneDistribution, ...]

    @property
    def width(self) -> int:
        return len(self.slots)


@dataclass
class LiteralTable:
    """One row per literal type. Row g has mult[g, w] clones of red mass red[g, w]."""
    weight: np.ndarray
    p1: np.ndarray
    p0: np.ndarray
    pstar: np.ndarray
    red: np.ndarray
    mult: np.ndarray

    @property
    def purple(self) -> np.ndarray:
        return self.p1 + self.pstar

    @property
    def degree(self) -> np.ndarray:
        return self.mult.sum(axis=1)

    def __len__(self) -> int:
        return int(self.weight.shape[0])


@dataclass
class ClauseBlock:
    """Clause types of one width: weights (C,), per-slot red and purple masses (C, width)."""
    weight: np.ndarray
    red: np.ndarray
    purple: np.ndarray

    @property
    def width(self) -> int:
        return int(self.red.shape[1])

    @property
    def yellow(self) -> np.ndarray:
        return 1.0 - self.purple


@dataclass
class TypeSystem:
    k: int
    density: Number
    mode: str
    literal_types: List[LiteralType] = field(default_factory=list)
    literal_weights: List[Number] = field(default_factory=list)
    neg: List[int] = field(default_factory=list)
    clause_types: List[ClauseType] = field(default_factory=list)
    clause_weights: List[Number] = field(default_factory=list)
    n: Optional[int] = None
    m: Optional[int] = None
    exchangeable: bool = False
    literal_of: Dict[int, int] = field(default_factory=dict)
    clause_of: List[int] = field(default_factory=list)
    truncation: float = 0.0
    yellow_slot_mean: Optional[float] = None
    sp_yellow_mean: Optional[float] = None
    _literal_table: Optional[LiteralTable] = field(default=None, repr=False, compare=False)
    _clause_blocks: Optional[List[ClauseBlock]] = field(default=None, repr=False, compare=False)
    _partners: Optional[Dict[Tuple[int, int], List[Tuple[int, int, Number]]]] = field(default=None, repr=False,
                                                                                     compare=False)
    _overlap_layout: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def explicit(self) -> bool:
        return bool(self.literal_types)

    def require_explicit(self, what: str) -> None:
        if not self.explicit:
            raise ValidationError("%s needs an explicit type system (got mode %r)" % (what, self.mode))

    # numeric views

    def literal_table(self) -> LiteralTable:
        if self._literal_table is None:
            self.require_explicit("literal_table")
            G = len(self.literal_types)
            if self.exchangeable:
                W = 1
            else:
                W = max(1, max(t.degree for t in self.literal_types))
            red = np.zeros((G, W))
            mult = np.zeros((G, W))
            for g, t in enumerate(self.literal_types):
                if self.exchangeable:
                    red[g, 0] = float(t.clones[0].pr) if t.clones else 0.0
                    mult[g, 0] = t.degree
                else:
                    for h, c in enumerate(t.clones):
                        red[g, h] = float(c.pr)
                        mult[g, h] = 1.0
            self._literal_table = LiteralTable(
                weight=np.array([float(w) for w in self.literal_weights]),
                p1=np.array([float(t.signature.p1) for t in self.literal_types]),
                p0=np.array([float(t.signature.p0) for t in self.literal_types]),
                pstar=np.array([float(t.signature.pstar) for t in self.literal_types]),
                red=red, mult=mult)
        return self._literal_table

    def clause_blocks(self) -> List[ClauseBlock]:
        if self._clause_blocks is None:
            self.require_explicit("clause_blocks")
            by_width: Dict[int, List[int]] = {}
            for i, ct in enumerate(self.clause_types):
                by_width.setdefault(ct.width, []).append(i)
            blocks = []
            for width in sorted(by_width):
                ids = by_width[width]
                blocks.append(ClauseBlock(
                    weight=np.array([float(self.clause_weights[i]) for i in ids]),
                    red=np.array([[float(d.pr) for d in self.clause_types[i].dists] for i in ids]),
                    purple=np.array([[float(d.purple) for d in self.clause_types[i].dists] for i in ids])))
            self._clause_blocks = blocks
        return self._clause_blocks

    def block_members(self) -> List[List[int]]:
        """Clause-type indices behind each clause block, in block order."""
        by_width: Dict[int, List[int]] = {}
        for i, ct in enumerate(self.clause_types):
            by_width.setdefault(ct.width, []).append(i)
        return [by_width[w] for w in sorted(by_width)]

    # incidence

    def partner_weight(self, l_idx: int, t_idx: int) -> Number:
        """m_l / n_t."""
        return self.clause_weights[l_idx] * self.density / (2 * self.literal_weights[t_idx])

    def partners(self, t: int, h: int) -> List[Tuple[int, int, Number]]:
        """(clause type, slot, weight) pairs feeding clone h of literal type t; weights sum to 1."""
        if self._partners is None:
            self.require_explicit("partners")
            table: Dict[Tuple[int, int], List[Tuple[int, int, Number]]] = {}
            for li, ct in enumerate(self.clause_types):
                for j, (ti, hi) in enumerate(ct.slots):
                    if self.exchangeable:
                        d = self.literal_types[ti].degree
                        w = self.partner_weight(li, ti) / d
                        for hh in range(1, d + 1):
                            table.setdefault((ti, hh), []).append((li, j, w))
                    else:
                        table.setdefault((ti, hi), []).append((li, j, self.partner_weight(li, ti)))
            self._partners = table
        return self._partners.get((t, h), [])

    def n_pairs(self) -> int:
        """|[T]|: literal types up to negation."""
        return sum(1 for t, u in enumerate(self.neg) if t <= u)

    def polylog_c(self) -> Optional[Number]:
        if not self.explicit:
            return None
        c: Number = Fraction(self.n_pairs())
        c += Fraction(sum(ct.width for ct in self.clause_types), 2)
        for t, lt in enumerate(self.literal_types):
            for h in range(1, lt.degree + 1):
                c += Fraction(len(self.partners(t, h)) - 1, 2)
        return c

    def to_dict(self) -> dict:
        out = {"k": self.k, "mode": self.mode, "density": self.density, "n": self.n, "m": self.m,
               "exchangeable": self.exchangeable, "truncation": self.truncation}
        if not self.explicit:
            lt = self.literal_table()
            out["literal_rows"] = len(lt)
            out["clause_types"] = sum(len(b.weight) for b in self.clause_blocks())
            out["yellow_slot_mean"] = self.yellow_slot_mean
            out["sp_yellow_mean"] = self.sp_yellow_mean
            return out
        keys = [t.key for t in self.literal_types]
        out["literal_types"] = [dict(t.to_dict(), weight=w, negation=keys[self.neg[i]])
                                for i, (t, w) in enumerate(zip(self.literal_types, self.literal_weights))]
        out["clause_types"] = [{"key": "C" + "|".join("%s@%d" % (keys[ti], h) for ti, h in ct.slots),
                                "slots": [[keys[ti], h] for ti, h in ct.slots],
                                "dists": list(ct.dists), "weight": w}
                               for ct, w in zip(self.clause_types, self.clause_weights)]
        out["polylog_C"] = self.polylog_c()
        return out


# ------------- Concrete formulas -------------

def _average(dists: Sequence[CloneDistribution]) -> CloneDistribution:
    n = len(dists)
    return CloneDistribution(sum((d.pr for d in dists), Fraction(0)) / n,
                             sum((d.pb for d in dists), Fraction(0)) / n,
                             sum((d.pg for d in dists), Fraction(0)) / n,
                             sum((d.py for d in dists), Fraction(0)) / n)


def assign_types(fp: Formula, k: int, r: DensityLike, *, mode: str = MODE_FULL,
                 lam: Callable[..., List[CloneDistribution]] = lambda_map,
                 check_bounds: bool = True) -> TypeSystem:
    """Type system of a pruned formula.

    Clause i gets theta_(i,j) = Lambda_j(signatures of clause i). Literals are
    grouped by (d_l, d_notl, clone distributions of l and of not-l); in
    degree-pair mode only by (d_l, d_notl), with per-clone distributions
    averaged over the class. Clauses are grouped by their (literal type,
    clone index) tuple. The literal universe is the set of variables
    occurring in fp.
    """
    if mode not in MODES:
        raise ValidationError("unknown type mode %r (expected one of %s)" % (mode, ", ".join(MODES)))
    if fp.m == 0:
        raise ValidationError("a formula without clauses has no type system")
    if check_bounds:
        rep = check_degree_bounds(fp, k, r)
        if not rep.ok:
            raise ValidationError("degree bound violated for %d literals; run prune first" % len(rep.violators))

    deg = degree_profile(fp)
    sigs: Dict[int, Signature] = {}

    def sig(l: int) -> Signature:
        if l not in sigs:
            sigs[l] = sp_marginal(k, deg[l] - deg[-l])
        return sigs[l]

    for c in fp.clauses:
        for l in c:
            sig(l)
            sig(-l)

    def block(ids: List[int]) -> List[List[CloneDistribution]]:
        return [lam([sigs[l] for l in fp.clauses[i]], k=k) for i in ids]

    dists: List[List[CloneDistribution]] = []
    for part in pmap(block, list(chunked(range(fp.m), CLAUSE_CHUNK))):
        dists.extend(part)

    layout = clone_layout(fp)
    clone_dist: Dict[Tuple[int, int], CloneDistribution] = {}
    for i, row in enumerate(layout):
        for j, clone in enumerate(row):
            clone_dist[clone] = dists[i][j]

    literals = [l for x in fp.variables() for l in (x, -x)]
    own = {l: tuple(clone_dist[(l, h)] for h in range(1, deg[l] + 1)) for l in literals}

    if mode == MODE_FULL:
        keys = {l: (deg[l], deg[-l], own[l], own[-l]) for l in literals}
    else:
        keys = {l: (deg[l], deg[-l]) for l in literals}

    index: Dict[tuple, int] = {}
    members: List[List[int]] = []
    literal_of: Dict[int, int] = {}
    for l in literals:
        key = keys[l]
        if key not in index:
            index[key] = len(members)
            members.append([])
        members[index[key]].append(l)
        literal_of[l] = index[key]

    def clones_of(group: List[int]) -> Tuple[CloneDistribution, ...]:
        if mode == MODE_FULL:
            return own[group[0]]
        d = deg[group[0]]
        return tuple(_average([own[l][h] for l in group]) for h in range(d))

    own_clones = [clones_of(g) for g in members]
    neg = [literal_of[-g[0]] for g in members]
    literal_types = [LiteralType(deg[g[0]], deg[-g[0]], sigs[g[0]], own_clones[t], own_clones[neg[t]])
                     for t, g in enumerate(members)]
    two_n = len(literals)
    literal_weights: List[Number] = [Fraction(len(g), two_n) for g in members]

    # all clones of every type alike and every clause single-typed: slots are exchangeable
    exchangeable = all(len(set(c)) <= 1 for c in own_clones) and all(
        len({literal_of[l] for l in c}) == 1 and len(set(dists[i])) == 1 for i, c in enumerate(fp.clauses))

    def slot_key(row: List[Tuple[int, int]]) -> Tuple[Tuple[int, int], ...]:
        if exchangeable:
            return tuple((literal_of[l], j % deg[l] + 1) for j, (l, _) in enumerate(row))
        return tuple((literal_of[l], h) for l, h in row)

    cindex: Dict[tuple, int] = {}
    counts: List[int] = []
    clause_types: List[ClauseType] = []
    clause_of: List[int] = []
    for i, row in enumerate(layout):
        slots = slot_key(row)
        if slots not in cindex:
            cindex[slots] = len(clause_types)
            clause_types.append(ClauseType(slots, tuple(dists[i])))
            counts.append(0)
        counts[cindex[slots]] += 1
        clause_of.append(cindex[slots])
    clause_weights: List[Number] = [Fraction(c, fp.m) for c in counts]

    if len(literal_types) > max(8, two_n // 2):
        log.warning("type count explosion: %d literal types for %d literals (mode %s)",
                    len(literal_types), two_n, mode)
    log.info("assign_types: %d literal types, %d clause types (mode %s)",
             len(literal_types), len(clause_types), mode)
    return TypeSystem(k=k, density=Fraction(fp.m, two_n // 2), mode=mode,
                      literal_types=literal_types, literal_weights=literal_weights, neg=neg,
                      clause_types=clause_types, clause_weights=clause_weights, exchangeable=exchangeable,
                      n=two_n // 2, m=fp.m, literal_of=literal_of, clause_of=clause_of)


def regular_type_system(k: int, d: int, *, lam: Callable[..., List[CloneDistribution]] = lambda_map) -> TypeSystem:
    """The single-type system of random regular k-SAT: every literal has degree d."""
    if k < 3 or d < 1:
        raise ValidationError("regular system needs k >= 3 and d >= 1 (got k=%d d=%d)" % (k, d))
    sig = sp_marginal(k, 0)
    dists = lam([sig] * k, k=k)
    t = LiteralType(d, d, sig, (dists[0],) * d, (dists[0],) * d)
    ct = ClauseType(tuple((0, j % d + 1) for j in range(k)), tuple(dists))
    return TypeSystem(k=k, density=Fraction(2 * d, k), mode="regular",
                      literal_types=[t], literal_weights=[Fraction(1)], neg=[0],
                      clause_types=[ct], clause_weights=[Fraction(1)], exchangeable=True)


# ------------- Checks -------------

@dataclass
class IdentityReport:
    ok: bool
    checked: int
    violations: List[Tuple[int, int]]
    max_dev_from_2mk: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checked": self.checked,
                "violations": [{"clause_type": l, "slot": j} for l, j in self.violations],
                "max_dev_from_2mk": self.max_dev_from_2mk}


def check_type_identity(ts: TypeSystem) -> IdentityReport:
    """red_j == purple_j * prod_{j' != j} yellow_j' on every clause slot (exactly for Fractions)."""
    bad: List[Tuple[int, int]] = []
    checked = 0
    dev = 0.0
    target = 2.0 ** (-ts.k)
    if ts.explicit:
        for li, ct in enumerate(ts.clause_types):
            for j, dj in enumerate(ct.dists):
                others = 1
                for jj, other in enumerate(ct.dists):
                    if jj != j:
                        others *= other.py
                rhs = dj.purple * others
                checked += 1
                same = (dj.pr == rhs) if isinstance(rhs, Fraction) else abs(float(dj.pr) - float(rhs)) <= 1e-14
                if not same:
                    bad.append((li, j))
                dev = max(dev, abs(float(dj.pr) - target))
    else:
        offset = 0
        for b in ts.clause_blocks():
            rhs = b.purple * excl1(b.yellow)
            diff = np.abs(b.red - rhs)
            for li, j in zip(*np.nonzero(diff > 1e-14)):
                bad.append((offset + int(li), int(j)))
            checked += b.red.size
            dev = max(dev, float(np.max(np.abs(b.red - target))))
            offset += len(b.weight)
    return IdentityReport(not bad, checked, bad, dev)


def check_ty(ts: TypeSystem) -> Verdict:
    """TY1: every clone of a type carries the type's (p1, p0, pstar); TY2: l and not-l agree."""
    ts.require_explicit("check_ty")
    bad: List[str] = []
    for t, lt in enumerate(ts.literal_types):
        s = lt.signature
        for h, c in enumerate(lt.clones, start=1):
            if (c.p1, c.p0, c.pstar) != (s.p1, s.p0, s.pstar):
                bad.append("type %d clone %d breaks TY1" % (t, h))
        u = ts.literal_types[ts.neg[t]].signature
        if s.pstar != u.pstar or s.p1 != u.p0:
            bad.append("type %d and its negation break TY2" % t)
    return Verdict(not bad, bad)


def is_theta_shade(fp: Formula, ts: TypeSystem, s: Shade, slack: Number, *, rounding: Number = 1) -> Verdict:
    """Empirical colour counts of s against the type system's prescriptions.

    Literal side: for every type t, clone h and colour z the number of type-t
    literals whose clone h has colour z is within slack * n_t + rounding of
    n_t * t_h^z. Clause side: yellow counts per slot within slack * m_l +
    rounding of m_l * l_j^y.
    """
    ts.require_explicit("is_theta_shade")
    if not ts.literal_of:
        raise ValidationError("type system carries no literal map; build it with assign_types")
    slack = as_fraction(slack)
    rounding = as_fraction(rounding)
    colors = s.as_dict()
    groups: Dict[int, List[int]] = {}
    for l, t in ts.literal_of.items():
        groups.setdefault(t, []).append(l)
    bad: List[str] = []
    for t, lits in sorted(groups.items()):
        n_t = len(lits)
        for h, dist in enumerate(ts.literal_types[t].clones, start=1):
            for z in (RED, BLUE, GREEN, YELLOW):
                count = sum(1 for l in lits if colors.get((l, h)) == z)
                if abs(count - n_t * dist.mass(z)) > slack * n_t + rounding:
                    bad.append("type %d clone %d colour %s: %d vs %s" % (t, h, z, count, float(n_t * dist.mass(z))))
    layout = clone_layout(fp)
    members: Dict[int, List[int]] = {}
    for i, li in enumerate(ts.clause_of):
        members.setdefault(li, []).append(i)
    for li, ids in sorted(members.items()):
        m_l = len(ids)
        for j, dist in enumerate(ts.clause_types[li].dists):
            yellow = sum(1 for i in ids if colors.get(layout[i][j]) == YELLOW)
            if abs(yellow - m_l * dist.py) > slack * m_l + rounding:
                bad.append("clause type %d slot %d: %d yellow vs %s" % (li, j, yellow, float(m_l * dist.py)))
    return Verdict(not bad, bad)


# ------------- Degree ensembles -------------

def degree_ensemble(k: int, r: float, pmf: Callable[[np.ndarray], np.ndarray], support: Tuple[int, int], *,
                    samples: Optional[int] = None, seed: int = 0) -> TypeSystem:
    """Numeric type system for i.i.d. literal degrees with law pmf on [lo, hi].

    Literal types are degree pairs (d+, d-) weighted P[d+] P[d-]; clause slots
    are drawn i.i.d. from the size-biased law rho(d+, d-) proportional to
    d+ P[d+] P[d-]. A clone's red mass is averaged over its clause context:
    (p1 + pstar) * E_rho[p0]^(k-1). Clause types are `samples` draws of k
    slots, deduplicated; pairs whose signature leaves [0, 1] are dropped and
    counted as truncation. sp_yellow_mean is E_rho[p0] taken before that cut,
    with p0 linear in d+ - d-; yellow_slot_mean is the mean under the law the
    clause slots are actually drawn from.
    """
    lo, hi = support
    if lo < 1 or hi < lo:
        raise ValidationError("ensemble support must satisfy 1 <= lo <= hi (got %d..%d)" % (lo, hi))
    samples = config.ENSEMBLE_SAMPLES if samples is None else samples
    ds = np.arange(lo, hi + 1)
    P = np.asarray(pmf(ds), dtype=float)
    inside = float(P.sum())
    P = P / inside
    dpos, dneg = np.meshgrid(ds, ds, indexing="ij")
    weight = np.outer(P, P)
    p1, p0, pstar = signature_arrays(k, dpos - dneg)
    valid = (p1 > 0) & (p0 > 0)
    dropped = float(weight[~valid].sum())
    rho_all = dpos * weight
    sp_mean = float((rho_all * p0).sum() / rho_all.sum())

    rho = np.where(valid, dpos * weight, 0.0)
    rho = rho / rho.sum()
    s_win = float((rho * p0).sum())
    red = (p1 + pstar) * s_win ** (k - 1)
    valid &= red <= p1
    dropped = float(weight[~valid].sum())
    rho = np.where(valid, dpos * weight, 0.0)
    rho = rho / rho.sum()
    s_win = float((rho * p0).sum())
    red = (p1 + pstar) * s_win ** (k - 1)

    sel = valid.ravel()
    w = weight.ravel()[sel]
    table = LiteralTable(weight=w / w.sum(), p1=p1.ravel()[sel], p0=p0.ravel()[sel],
                         pstar=np.full(int(sel.sum()), pstar), red=red.ravel()[sel][:, None],
                         mult=dpos.ravel()[sel][:, None].astype(float))

    rho_flat = rho.ravel()
    if hi == lo:
        rows = np.zeros((1, k), dtype=np.int64)
        counts = np.array([samples])
    else:
        rng = make_rng(seed)
        draws = np.sort(rng.choice(rho_flat.size, size=(samples, k), p=rho_flat), axis=1)
        rows, counts = np.unique(draws, axis=0, return_counts=True)
    cp1 = p1.ravel()[rows]
    cp0 = p0.ravel()[rows]
    purple = cp1 + pstar
    block = ClauseBlock(weight=counts / counts.sum(), red=purple * excl1(cp0), purple=purple)

    truncation = max(0.0, 1.0 - inside * inside) + dropped
    log.info("degree ensemble k=%d r=%.6g: %d literal rows, %d clause types, truncation %.3e",
             k, r, len(table), len(block.weight), truncation)
    return TypeSystem(k=k, density=float(r), mode="ensemble", exchangeable=(hi == lo),
                      truncation=truncation, yellow_slot_mean=s_win, sp_yellow_mean=sp_mean,
                      _literal_table=table, _clause_blocks=[block])


def poisson_window(k: int, r: float, trunc: Optional[float] = None) -> Tuple[int, int]:
    lam = k * r / 2.0
    if trunc is None:
        trunc = k ** 3 * 2.0 ** (k / 2.0)
    half = min(trunc, config.ENSEMBLE_SIGMAS * math.sqrt(lam))
    return max(1, int(math.ceil(lam - half))), int(math.floor(lam + half))


def poisson_type_ensemble(k: int, r: float, trunc: Optional[float] = None, *,
                          samples: Optional[int] = None, seed: int = 0) -> TypeSystem:
    """Degrees ~ Po(kr/2), truncated to the pruning window (and to ENSEMBLE_SIGMAS standard deviations)."""
    if k < 3 or r <= 0:
        raise ValidationError("poisson ensemble needs k >= 3 and r > 0")
    lam = k * r / 2.0
    lo, hi = poisson_window(k, r, trunc)
    law = stats.poisson(lam)
    tail = float(law.cdf(lo - 1) + law.sf(hi))
    log.debug("poisson window %d..%d drops tail mass %.3e per coordinate", lo, hi, tail)
    return degree_ensemble(k, r, law.pmf, (lo, hi), samples=samples, seed=seed)


def regular_ensemble(k: int, d: int) -> TypeSystem:
    """Point mass at (d, d): numerically the regular single-type system."""
    return degree_ensemble(k, 2.0 * d / k, lambda ds: np.ones(len(ds)), (d, d), samples=1)
