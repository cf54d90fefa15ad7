"""Extending covers to satisfying assignments through a 2-SAT residual.

Clauses without red or blue clones are the only ones a star assignment can
break; V2 gives each of them two green clones, and keeping the first two
turns the residual into 2-SAT, solved on the implication graph.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from .cover import (GREEN, ONE, RED, BLUE, SCOPE_OCCURRING, STAR, ZERO, CoverMap, Shade, clone_layout,
                    is_cover, is_valid_shade, shade_from_cover)
from .errors import ContractViolation, ValidationError
from .formula import Formula, evaluate, make_formula, var_of
from .solver import model_array

log = logging.getLogger("ksat-lab.twosat")


@dataclass(frozen=True)
class TwoSatInstance:
    n_vars: int
    clauses: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        for a, b in self.clauses:
            for l in (a, b):
                if l == 0 or var_of(l) > self.n_vars:
                    raise ValidationError("2-SAT literal %d out of range 1..%d" % (l, self.n_vars))

    def to_formula(self) -> Formula:
        return make_formula(self.n_vars, self.clauses, k=2)

    def to_dict(self) -> dict:
        return {"n_vars": self.n_vars, "clauses": [list(c) for c in self.clauses]}


def two_sat(n_vars: int, clauses: Sequence[Sequence[int]]) -> TwoSatInstance:
    return TwoSatInstance(n_vars, tuple((int(a), int(b)) for a, b in clauses))


def reduce_to_2sat(f: Formula, s: Shade, scope: str = SCOPE_OCCURRING) -> TwoSatInstance:
    v = is_valid_shade(f, s, scope)
    if not v.ok:
        raise ValidationError("invalid shade: " + "; ".join(v.violations[:3]))
    colors = s.as_dict()
    out: List[Tuple[int, int]] = []
    for i, row in enumerate(clone_layout(f)):
        cols = [colors[cl] for cl in row]
        if RED in cols or BLUE in cols:
            continue
        greens = [cl[0] for cl, c in zip(row, cols) if c == GREEN]
        if len(greens) < 2:
            raise ContractViolation("clause %d survives the reduction with %d green clones" % (i, len(greens)))
        out.append((greens[0], greens[1]))
    return TwoSatInstance(f.n_vars, tuple(out))


# ------------- Solving -------------

def implication_graph(t: TwoSatInstance) -> nx.DiGraph:
    g = nx.DiGraph()
    for x in range(1, t.n_vars + 1):
        g.add_node(x)
        g.add_node(-x)
    for a, b in t.clauses:
        g.add_edge(-a, b)
        g.add_edge(-b, a)
    return g


def solve_2sat(t: TwoSatInstance) -> Optional[Dict[int, int]]:
    """Satisfying assignment, or None when some variable shares a strongly
    connected component with its negation."""
    g = implication_graph(t)
    cond = nx.condensation(g)
    comp = cond.graph["mapping"]
    rank = {c: i for i, c in enumerate(nx.topological_sort(cond))}
    out: Dict[int, int] = {}
    for x in range(1, t.n_vars + 1):
        if comp[x] == comp[-x]:
            return None
        out[x] = 1 if rank[comp[x]] > rank[comp[-x]] else 0
    for a, b in t.clauses:
        if not (_true(out, a) or _true(out, b)):
            raise ContractViolation("2-SAT assignment violates clause (%d, %d)" % (a, b))
    return out


def _true(assignment: Dict[int, int], l: int) -> bool:
    return assignment[var_of(l)] == (1 if l > 0 else 0)


# ------------- Bicycles -------------

@dataclass(frozen=True)
class Bicycle:
    literals: Tuple[int, ...]

    @property
    def h(self) -> int:
        return len(self.literals) - 2

    def to_dict(self) -> dict:
        return {"h": self.h, "literals": list(self.literals)}


def _successors(t: TwoSatInstance) -> Dict[int, Set[int]]:
    succ: Dict[int, Set[int]] = {}
    for a, b in t.clauses:
        succ.setdefault(-a, set()).add(b)
        succ.setdefault(-b, set()).add(a)
    return succ


def is_bicycle(t: TwoSatInstance, seq: Sequence[int]) -> bool:
    if len(seq) < 3:
        return False
    succ = _successors(t)
    if any(seq[i + 1] not in succ.get(seq[i], ()) for i in range(len(seq) - 1)):
        return False
    inner = [var_of(l) for l in seq[1:-1]]
    if len(set(inner)) != len(inner):
        return False
    return var_of(seq[0]) in inner and var_of(seq[-1]) in inner


def find_bicycles(t: TwoSatInstance, max_h: int = 12, limit: Optional[int] = None) -> List[Bicycle]:
    """Every literal sequence l_0..l_{h+1} with h <= max_h such that each
    (¬l_i ∨ l_{i+1}) is a clause, l_1..l_h sit on distinct variables and the
    two end literals sit on variables among them. A closed cycle is reported
    once, not once per rotation."""
    succ = _successors(t)
    pred: Dict[int, Set[int]] = {}
    for a, outs in succ.items():
        for b in outs:
            pred.setdefault(b, set()).add(a)
    key = lambda l: (var_of(l), l < 0)
    found: List[Bicycle] = []
    seen: Set[Tuple[int, ...]] = set()

    def canonical(seq: Tuple[int, ...]) -> Tuple[int, ...]:
        inner = seq[1:-1]
        if len(inner) < 2 or seq[0] != inner[-1] or seq[-1] != inner[0]:
            return seq
        rot = min((inner[i:] + inner[:i] for i in range(len(inner))), key=lambda r: [key(l) for l in r])
        return (0,) + rot

    def emit(path: List[int], used: Set[int]) -> bool:
        heads = sorted((u for u in pred.get(path[0], ()) if var_of(u) in used), key=key)
        tails = sorted((v for v in succ.get(path[-1], ()) if var_of(v) in used), key=key)
        for u in heads:
            for v in tails:
                seq = (u,) + tuple(path) + (v,)
                c = canonical(seq)
                if c in seen:
                    continue
                seen.add(c)
                found.append(Bicycle(seq))
                if limit is not None and len(found) >= limit:
                    return True
        return False

    def walk(path: List[int], used: Set[int]) -> bool:
        if emit(path, used):
            return True
        if len(path) >= max_h:
            return False
        for nxt in sorted(succ.get(path[-1], ()), key=key):
            if var_of(nxt) in used:
                continue
            path.append(nxt)
            used.add(var_of(nxt))
            stop = walk(path, used)
            path.pop()
            used.discard(var_of(nxt))
            if stop:
                return True
        return False

    for x in range(1, t.n_vars + 1):
        for start in (x, -x):
            if walk([start], {x}):
                return found
    return found


# ------------- Extension -------------

@dataclass
class NotExtendible:
    reason: str
    instance: TwoSatInstance

    def to_dict(self) -> dict:
        return {"extendible": False, "reason": self.reason, "two_sat": self.instance.to_dict()}


def extend_cover(f: Formula, z: CoverMap, scope: str = SCOPE_OCCURRING) -> Union[Dict[int, int], NotExtendible]:
    v = is_cover(f, z, scope)
    if not v.ok:
        raise ValidationError("not a cover: " + "; ".join(v.violations[:3]))
    t = reduce_to_2sat(f, shade_from_cover(f, z, scope), scope)
    sol = solve_2sat(t)
    if sol is None:
        return NotExtendible("star residual 2-SAT is unsatisfiable", t)
    in_residual = {var_of(l) for c in t.clauses for l in c}
    sigma: Dict[int, int] = {}
    for x in range(1, f.n_vars + 1):
        val = z.of(x)
        if val == STAR:
            sigma[x] = sol[x] if x in in_residual else 1
        else:
            sigma[x] = 1 if val == ONE else 0
    if not evaluate(f, sigma):
        raise ContractViolation("extension of cover %s leaves a clause unsatisfied" % z)
    return sigma


def agreeing_models(f: Formula, z: CoverMap) -> np.ndarray:
    """Satisfying assignments (brute force) that agree with z on its 0/1 part."""
    models = model_array(f)
    keep = np.ones(models.shape[0], dtype=bool)
    for x in range(1, f.n_vars + 1):
        val = z.of(x)
        if val != STAR:
            keep &= models[:, x - 1] == (1 if val == ONE else 0)
    return models[keep]


def extendibility_discrepancy(f: Formula, z: CoverMap, scope: str = SCOPE_OCCURRING) -> bool:
    """True when brute force extends z but the first-two-greens reduction does not; logged."""
    res = extend_cover(f, z, scope)
    if isinstance(res, NotExtendible) and agreeing_models(f, z).shape[0] > 0:
        log.warning("cover %s extends by brute force but its 2-SAT residual is UNSAT", z)
        return True
    return False
