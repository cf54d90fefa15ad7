"""Covers, shades and their combinatorics at desk scale.

A cover is a {0,1,*} map on variables; a shade colors literal clones with
r(ed) / b(lue) / g(reen) / y(ellow). Derived colors: cyan c = {b, g},
purple p = {r, b, g}.

CV2 scope: under SCOPE_OCCURRING the "every true literal is frozen by a
critical clause" condition constrains only literals that occur in the formula,
and variables occurring nowhere are pinned to *. SCOPE_ALL applies it to every
literal of the variable universe.
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from . import config
from .errors import CapExceeded, ValidationError
from .formula import Assignment, Formula, evaluate, value_of, var_of
from .solver import model_array
from .util.parallel import pmap

log = logging.getLogger("ksat-lab.cover")

ZERO, ONE, STAR = 0, 1, 2
SYMBOLS = ("0", "1", "*")
NEG = (ONE, ZERO, STAR)

SCOPE_OCCURRING = "occurring"
SCOPE_ALL = "all"
SCOPES = (SCOPE_OCCURRING, SCOPE_ALL)

RED, BLUE, GREEN, YELLOW = "r", "b", "g", "y"
CYAN = frozenset((BLUE, GREEN))
PURPLE = frozenset((RED, BLUE, GREEN))

Clone = Tuple[int, int]


# ------------- Cover maps -------------

@dataclass(frozen=True)
class CoverMap:
    values: Tuple[int, ...]

    @property
    def n_vars(self) -> int:
        return len(self.values)

    def of(self, x: int) -> int:
        return self.values[x - 1]

    def lit(self, l: int) -> int:
        v = self.values[var_of(l) - 1]
        return v if l > 0 else NEG[v]

    def __str__(self) -> str:
        return "".join(SYMBOLS[v] for v in self.values)

    def to_dict(self) -> dict:
        return {str(x + 1): SYMBOLS[v] for x, v in enumerate(self.values)}


def cover_map(symbols: Sequence) -> CoverMap:
    """Build from symbols, e.g. cover_map("1*0") or cover_map([1, "*", 0])."""
    vals = []
    for s in symbols:
        s = str(s)
        if s not in SYMBOLS:
            raise ValidationError("cover value must be one of 0/1/*, got %r" % s)
        vals.append(SYMBOLS.index(s))
    return CoverMap(tuple(vals))


def _check_scope(scope: str) -> None:
    if scope not in SCOPES:
        raise ValidationError("unknown CV2 scope %r (expected one of %s)" % (scope, ", ".join(SCOPES)))


def _check_domain(f: Formula, z: CoverMap) -> None:
    if z.n_vars != f.n_vars:
        raise ValidationError("cover map defines %d variables, formula has %d" % (z.n_vars, f.n_vars))


@dataclass
class Verdict:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def _is_critical(z: CoverMap, clause: Sequence[int]) -> bool:
    vals = [z.lit(l) for l in clause]
    return vals.count(ONE) == 1 and vals.count(ZERO) == len(vals) - 1


def critical_clauses(f: Formula, z: CoverMap) -> Set[int]:
    _check_domain(f, z)
    return {i for i, c in enumerate(f.clauses) if _is_critical(z, c)}


def is_cover(f: Formula, z: CoverMap, scope: str = SCOPE_OCCURRING) -> Verdict:
    _check_domain(f, z)
    _check_scope(scope)
    bad: List[str] = []
    for i, c in enumerate(f.clauses):
        vals = [z.lit(l) for l in c]
        if ONE not in vals and vals.count(STAR) < 2:
            bad.append("clause %d: no true literal and fewer than two stars (CV1)" % i)
    frozen = {l for i in critical_clauses(f, z) for l in f.clauses[i] if z.lit(l) == ONE}
    occurring = {l for c in f.clauses for l in c}
    present = {var_of(l) for l in occurring}
    for x in range(1, f.n_vars + 1):
        v = z.of(x)
        if v == STAR:
            continue
        true_lit = x if v == ONE else -x
        if scope == SCOPE_OCCURRING:
            if x not in present:
                bad.append("variable %d occurs nowhere and must be * (CV2)" % x)
                continue
            if true_lit not in occurring:
                continue
        if true_lit not in frozen:
            bad.append("literal %d is true but sits in no critical clause (CV2)" % true_lit)
    return Verdict(not bad, bad)


def is_satisfying_cover(f: Formula, sigma: Assignment, scope: str = SCOPE_OCCURRING) -> Verdict:
    """A satisfying assignment read as a {0,1} map: CV1 holds, so it is a cover
    iff every true literal lies in a critical clause."""
    if not evaluate(f, sigma):
        raise ValidationError("assignment does not satisfy the formula")
    z = CoverMap(tuple(ONE if value_of(sigma, x) == 1 else ZERO for x in range(1, f.n_vars + 1)))
    return is_cover(f, z, scope)


def _count_space(n: int, cap: Optional[int]) -> None:
    cap = config.ENUM_CAP if cap is None else cap
    if n > cap:
        raise CapExceeded("cover enumeration", n, cap)


def _iter_maps(n: int, first: Optional[int] = None) -> Iterator[CoverMap]:
    if n == 0:
        yield CoverMap(())
        return
    heads = (ZERO, ONE, STAR) if first is None else (first,)
    for h in heads:
        for tail in itertools.product((ZERO, ONE, STAR), repeat=n - 1):
            yield CoverMap((h,) + tail)


def enumerate_covers(f: Formula, scope: str = SCOPE_OCCURRING, cap: Optional[int] = None) -> List[CoverMap]:
    """All covers in lexicographic order over (0, 1, *), x1 most significant."""
    _check_scope(scope)
    _count_space(f.n_vars, cap)
    if f.n_vars == 0:
        return [CoverMap(())] if is_cover(f, CoverMap(()), scope) else []

    def part(head: int) -> List[CoverMap]:
        return [z for z in _iter_maps(f.n_vars, head) if is_cover(f, z, scope).ok]

    return [z for block in pmap(part, [ZERO, ONE, STAR]) for z in block]


# ------------- Shades -------------

def clone_layout(f: Formula) -> List[List[Clone]]:
    """Clone id (literal, j) of every slot; j counts occurrences of the literal
    in clause-major, slot-major order starting at 1."""
    seen: Dict[int, int] = {}
    out: List[List[Clone]] = []
    for c in f.clauses:
        row = []
        for l in c:
            seen[l] = seen.get(l, 0) + 1
            row.append((l, seen[l]))
        out.append(row)
    return out


@dataclass(frozen=True)
class Shade:
    n_vars: int
    colors: Tuple[Tuple[Clone, str], ...]

    def as_dict(self) -> Dict[Clone, str]:
        return dict(self.colors)

    def to_dict(self) -> dict:
        return {"%d:%d" % clone: col for clone, col in self.colors}


def make_shade(n_vars: int, colors: Dict[Clone, str]) -> Shade:
    return Shade(n_vars, tuple(sorted(colors.items(), key=lambda kv: (var_of(kv[0][0]), kv[0][0] < 0, kv[0][1]))))


def shade_from_cover(f: Formula, z: CoverMap, scope: str = SCOPE_OCCURRING) -> Shade:
    v = is_cover(f, z, scope)
    if not v.ok:
        raise ValidationError("not a cover: " + "; ".join(v.violations[:3]))
    crit = critical_clauses(f, z)
    colors: Dict[Clone, str] = {}
    for i, row in enumerate(clone_layout(f)):
        for (l, j) in row:
            val = z.lit(l)
            if val == STAR:
                colors[(l, j)] = GREEN
            elif val == ZERO:
                colors[(l, j)] = YELLOW
            else:
                colors[(l, j)] = RED if i in crit else BLUE
    return make_shade(f.n_vars, colors)


def _literal_value(colors: Dict[Clone, str], clones: Dict[int, List[Clone]], l: int) -> Optional[int]:
    cs = clones.get(l, [])
    if not cs:
        return None
    first = colors[cs[0]]
    if first in (RED, BLUE):
        return ONE
    return ZERO if first == YELLOW else STAR


def is_valid_shade(f: Formula, s: Shade, scope: str = SCOPE_OCCURRING) -> Verdict:
    _check_scope(scope)
    if s.n_vars != f.n_vars:
        raise ValidationError("shade is over %d variables, formula has %d" % (s.n_vars, f.n_vars))
    colors = s.as_dict()
    layout = clone_layout(f)
    clones: Dict[int, List[Clone]] = {}
    for row in layout:
        for cl in row:
            clones.setdefault(cl[0], []).append(cl)
    for cs in clones.values():
        for cl in cs:
            if cl not in colors:
                raise ValidationError("shade misses clone %d:%d" % cl)
    bad: List[str] = []
    extra = set(colors) - {cl for cs in clones.values() for cl in cs}
    if extra:
        bad.append("shade colors %d clones that do not exist" % len(extra))
    if any(c not in (RED, BLUE, GREEN, YELLOW) for c in colors.values()):
        bad.append("unknown color")
        return Verdict(False, bad)

    # SD1: per-literal coherence and complementarity
    klass = {RED: ONE, BLUE: ONE, YELLOW: ZERO, GREEN: STAR}
    for x in range(1, f.n_vars + 1):
        vals = {}
        for l in (x, -x):
            ks = {klass[colors[cl]] for cl in clones.get(l, [])}
            if len(ks) > 1:
                bad.append("literal %d mixes colors across its clones (SD1)" % l)
            if ks:
                vals[l] = ks.pop()
        if x in vals and -x in vals and vals[-x] != NEG[vals[x]]:
            bad.append("variable %d: clones of %d and %d disagree (SD1)" % (x, x, -x))
        # SD2: a true literal needs a red clone
        for l in (x, -x):
            v = vals.get(l)
            if v is None and vals.get(-l) is not None:
                v = NEG[vals[-l]]
                if v == ONE and scope == SCOPE_ALL:
                    bad.append("literal %d is true but has no clones (SD2)" % l)
                continue
            if v == ONE and all(colors[cl] == BLUE for cl in clones[l]):
                bad.append("literal %d has only blue clones (SD2)" % l)

    for i, row in enumerate(layout):
        cols = [colors[cl] for cl in row]
        if RED in cols:
            r = cols.index(RED)
            if any(c != YELLOW for t, c in enumerate(cols) if t != r):
                bad.append("clause %d: red clone next to a non-yellow clone (V1)" % i)
        elif sum(1 for c in cols if c in CYAN) < 2:
            bad.append("clause %d: no red clone and fewer than two cyan clones (V2)" % i)
    return Verdict(not bad, bad)


def cover_from_shade(f: Formula, s: Shade, scope: str = SCOPE_OCCURRING) -> CoverMap:
    v = is_valid_shade(f, s, scope)
    if not v.ok:
        raise ValidationError("invalid shade: " + "; ".join(v.violations[:3]))
    colors = s.as_dict()
    clones: Dict[int, List[Clone]] = {}
    for row in clone_layout(f):
        for cl in row:
            clones.setdefault(cl[0], []).append(cl)
    vals = []
    for x in range(1, f.n_vars + 1):
        v = _literal_value(colors, clones, x)
        if v is None:
            w = _literal_value(colors, clones, -x)
            v = STAR if w is None else NEG[w]
        vals.append(v)
    return CoverMap(tuple(vals))


def enumerate_shades(f: Formula, scope: str = SCOPE_OCCURRING, cap: Optional[int] = None) -> List[Shade]:
    """Valid shades found by coloring clones directly: every SD1-coherent value
    pattern, every clause-local red/blue choice for true clones, filtered by
    is_valid_shade. Independent of the cover rules."""
    _check_scope(scope)
    _count_space(f.n_vars, cap)
    layout = clone_layout(f)
    out: List[Shade] = []
    for z in _iter_maps(f.n_vars):
        base: Dict[Clone, str] = {}
        options: List[List[Dict[Clone, str]]] = []
        for row in layout:
            ones = []
            for (l, j) in row:
                v = z.lit(l)
                if v == ONE:
                    ones.append((l, j))
                else:
                    base[(l, j)] = GREEN if v == STAR else YELLOW
            local = []
            for pick in itertools.product((RED, BLUE), repeat=len(ones)):
                cols = [base[cl] if cl not in ones else pick[ones.index(cl)] for cl in row]
                if RED in cols:
                    r = cols.index(RED)
                    if any(c != YELLOW for t, c in enumerate(cols) if t != r):
                        continue
                elif sum(1 for c in cols if c in CYAN) < 2:
                    continue
                local.append(dict(zip(ones, pick)))
            if not local:
                break
            options.append(local)
        else:
            for combo in itertools.product(*options):
                colors = dict(base)
                for part in combo:
                    colors.update(part)
                s = make_shade(f.n_vars, colors)
                if is_valid_shade(f, s, scope).ok and cover_from_shade(f, s, scope) == z:
                    out.append(s)
    return out


# ------------- Overlaps -------------

@dataclass(frozen=True)
class OverlapMatrix:
    entries: Tuple[Tuple[Fraction, ...], ...]

    @property
    def delta(self) -> Fraction:
        return 1 - sum(self.entries[z][z] for z in range(3))

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def transpose(self) -> "OverlapMatrix":
        return OverlapMatrix(tuple(tuple(self.entries[b][a] for b in range(3)) for a in range(3)))

    def to_dict(self) -> dict:
        return {"order": list(SYMBOLS), "entries": self.array(),
                "exact": [["%d/%d" % (v.numerator, v.denominator) for v in row] for row in self.entries],
                "delta": self.delta}


def overlap(z1: CoverMap, z2: CoverMap) -> OverlapMatrix:
    """Joint {0,1,*} statistics of two cover maps over the 2N literals."""
    if z1.n_vars != z2.n_vars or z1.n_vars == 0:
        raise ValidationError("overlap needs two maps over the same non-empty variable set")
    counts = [[0] * 3 for _ in range(3)]
    for x in range(1, z1.n_vars + 1):
        for l in (x, -x):
            counts[z1.lit(l)][z2.lit(l)] += 1
    den = 2 * z1.n_vars
    return OverlapMatrix(tuple(tuple(Fraction(c, den) for c in row) for row in counts))


# ------------- Brute-force counts -------------

def count_sat(f: Formula, cap: Optional[int] = None) -> int:
    return int(model_array(f, cap).shape[0])


def _codes(models: np.ndarray) -> np.ndarray:
    return (models.astype(np.int64) << np.arange(models.shape[1], dtype=np.int64)).sum(axis=1)


def count_nae(f: Formula, cap: Optional[int] = None) -> int:
    """Satisfying assignments whose complement also satisfies f."""
    models = model_array(f, cap)
    if models.shape[0] == 0:
        return 0
    codes = _codes(models)
    full = (1 << f.n_vars) - 1
    return int(np.isin(full - codes, codes).sum())


def count_balanced(f: Formula, tol, cap: Optional[int] = None) -> int:
    """Satisfying assignments whose fraction of true literal occurrences is within tol of 1/2."""
    tol = Fraction(tol) if not isinstance(tol, float) else Fraction(repr(tol))
    models = model_array(f, cap)
    total = f.n_clones
    if total == 0:
        return int(models.shape[0])
    pos = np.zeros(f.n_vars, dtype=np.int64)
    neg = np.zeros(f.n_vars, dtype=np.int64)
    for c in f.clauses:
        for l in c:
            if l > 0:
                pos[l - 1] += 1
            else:
                neg[-l - 1] += 1
    m = models.astype(np.int64)
    true_occ = m @ pos + (1 - m) @ neg
    # |true/total - 1/2| <= tol  <=>  |2 true - total| * den <= 2 total num
    lhs = np.abs(2 * true_occ - total) * tol.denominator
    return int((lhs <= 2 * total * tol.numerator).sum())
