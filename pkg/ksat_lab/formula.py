"""k-CNF formulas: representation, random generators, DIMACS I/O, degree diagnostics.

Literals are signed ints in DIMACS convention (x3 is 3, its negation -3).
A clause is a tuple of literals; repeated and complementary literals are kept
as drawn.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimacsError, ValidationError

log = logging.getLogger("ksat-lab.formula")

Literal = int
Clause = Tuple[int, ...]
DegreeProfile = Dict[int, int]
Assignment = Union[Mapping[int, int], Sequence[int]]

SEED_MAX = 2 ** 64


# ------------- Helpers -------------

def var_of(lit: int) -> int:
    return lit if lit > 0 else -lit


def negate(lit: int) -> int:
    return -lit


def all_literals(n_vars: int) -> List[int]:
    """x1, ¬x1, x2, ¬x2, ...: the canonical literal order used everywhere."""
    out: List[int] = []
    for x in range(1, n_vars + 1):
        out.append(x)
        out.append(-x)
    return out


def make_rng(seed: int) -> np.random.Generator:
    if not isinstance(seed, (int, np.integer)) or not (0 <= int(seed) < SEED_MAX):
        raise ValidationError("seed must be an unsigned 64-bit integer, got %r" % (seed,))
    return np.random.Generator(np.random.PCG64(int(seed)))


def value_of(assignment: Assignment, x: int) -> int:
    if isinstance(assignment, Mapping):
        return int(assignment[x])
    return int(assignment[x - 1])


def literal_true(assignment: Assignment, lit: int) -> bool:
    v = value_of(assignment, var_of(lit))
    return v == 1 if lit > 0 else v == 0


# ------------- Formula -------------

@dataclass(frozen=True)
class Formula:
    n_vars: int
    clauses: Tuple[Clause, ...]
    k: int = 0

    def __post_init__(self):
        if self.n_vars < 0:
            raise ValidationError("n_vars must be >= 0")
        for i, c in enumerate(self.clauses):
            if len(c) == 0:
                raise ValidationError("clause %d is empty" % i)
            for lit in c:
                if lit == 0 or var_of(lit) > self.n_vars:
                    raise ValidationError("clause %d: literal %d out of range 1..%d" % (i, lit, self.n_vars))

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def n_clones(self) -> int:
        return sum(len(c) for c in self.clauses)

    def widths(self) -> List[int]:
        return [len(c) for c in self.clauses]

    def variables(self) -> List[int]:
        """Variables that occur in some clause, ascending."""
        return sorted({var_of(l) for c in self.clauses for l in c})

    def to_dict(self) -> dict:
        return {"n_vars": self.n_vars, "k": self.k, "m": self.m,
                "clauses": [list(c) for c in self.clauses]}


def make_formula(n_vars: int, clauses: Iterable[Sequence[int]], k: Optional[int] = None) -> Formula:
    cl = tuple(tuple(int(l) for l in c) for c in clauses)
    if k is None:
        k = max((len(c) for c in cl), default=0)
    return Formula(n_vars=n_vars, clauses=cl, k=k)


def evaluate(f: Formula, assignment: Assignment) -> bool:
    return all(any(literal_true(assignment, l) for l in c) for c in f.clauses)


def degree_profile(f: Formula) -> DegreeProfile:
    prof = {l: 0 for l in all_literals(f.n_vars)}
    for c in f.clauses:
        for l in c:
            prof[l] += 1
    return prof


# ------------- Generators -------------

def gen_uniform(k: int, n_vars: int, m_clauses: int, seed: int) -> Formula:
    if k < 2 or n_vars < 1 or m_clauses < 0:
        raise ValidationError("gen_uniform needs k >= 2, n_vars >= 1, m_clauses >= 0 (got k=%d n=%d m=%d)"
                              % (k, n_vars, m_clauses))
    rng = make_rng(seed)
    xs = rng.integers(1, n_vars + 1, size=(m_clauses, k))
    neg = rng.integers(0, 2, size=(m_clauses, k)).astype(bool)
    lits = np.where(neg, -xs, xs)
    return Formula(n_vars=n_vars, clauses=tuple(tuple(int(l) for l in row) for row in lits), k=k)


def gen_configuration(profile: Mapping[int, int], clause_lengths: Sequence[int], seed: int,
                      *, n_vars: Optional[int] = None, k: Optional[int] = None) -> Formula:
    """Uniform bijection between literal clones and clause slots (Fisher-Yates shuffle)."""
    if any(d < 0 for d in profile.values()):
        raise ValidationError("negative literal degree in profile")
    if any(w < 1 for w in clause_lengths):
        raise ValidationError("clause lengths must be >= 1")
    if n_vars is None:
        n_vars = max((var_of(l) for l in profile), default=0)
    clones: List[int] = []
    for lit in all_literals(n_vars):
        clones.extend([lit] * int(profile.get(lit, 0)))
    extra = [l for l in profile if l == 0 or var_of(l) > n_vars]
    if extra:
        raise ValidationError("profile has literals outside 1..%d: %s" % (n_vars, extra[:5]))
    if len(clones) != sum(clause_lengths):
        raise ValidationError("clone/slot mismatch: %d clones vs %d slots" % (len(clones), sum(clause_lengths)))
    rng = make_rng(seed)
    order = rng.permutation(len(clones))
    clauses: List[Clause] = []
    pos = 0
    for w in clause_lengths:
        clauses.append(tuple(clones[i] for i in order[pos:pos + w]))
        pos += w
    if k is None:
        k = max(clause_lengths, default=0)
    return Formula(n_vars=n_vars, clauses=tuple(clauses), k=k)


def gen_regular(k: int, d: int, n_vars: int, seed: int) -> Formula:
    if k < 2 or n_vars < 1 or d < 0:
        raise ValidationError("gen_regular needs k >= 2, n_vars >= 1, d >= 0")
    if (2 * n_vars * d) % k:
        raise ValidationError("2*n*d = %d clones is not divisible by k=%d" % (2 * n_vars * d, k))
    m = 2 * n_vars * d // k
    prof = {l: d for l in all_literals(n_vars)}
    return gen_configuration(prof, [k] * m, seed, n_vars=n_vars, k=k)


# ------------- Majority vote -------------

@dataclass
class MajorityVote:
    assignment: Dict[int, int]
    w_maj: Fraction
    ties: List[int] = field(default_factory=list)
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"assignment": {str(x): v for x, v in self.assignment.items()},
                "w_maj": self.w_maj, "ties": self.ties, "degenerate": self.degenerate}


def majority_vote(f: Formula, seed: int) -> MajorityVote:
    rng = make_rng(seed)
    prof = degree_profile(f)
    assignment: Dict[int, int] = {}
    ties: List[int] = []
    top = 0
    for x in range(1, f.n_vars + 1):
        dp, dn = prof[x], prof[-x]
        top += max(dp, dn)
        if dp > dn:
            assignment[x] = 1
        elif dp < dn:
            assignment[x] = 0
        else:
            ties.append(x)
            assignment[x] = int(rng.integers(0, 2))
    total = f.n_clones
    if total == 0:
        log.warning("majority vote on a formula without clones; w_maj reported as 0")
        return MajorityVote(assignment, Fraction(0), ties, True)
    return MajorityVote(assignment, Fraction(top, total), ties, False)


# ------------- DIMACS -------------

def read_dimacs(data: Union[bytes, str]) -> Formula:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    n_vars: Optional[int] = None
    n_expected = 0
    clauses: List[Clause] = []
    pending: List[int] = []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("%"):
            break
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n_vars is not None:
                raise DimacsError("duplicate header", lineno)
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError("malformed header %r" % line, lineno)
            try:
                n_vars, n_expected = int(fields[2]), int(fields[3])
            except ValueError:
                raise DimacsError("non-integer header field in %r" % line, lineno)
            if n_vars < 0 or n_expected < 0:
                raise DimacsError("negative header field", lineno)
            continue
        if n_vars is None:
            raise DimacsError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError("non-integer literal %r" % tok, lineno)
            if lit == 0:
                if not pending:
                    raise DimacsError("empty clause", lineno)
                clauses.append(tuple(pending))
                pending = []
            elif var_of(lit) > n_vars:
                raise DimacsError("literal %d out of range 1..%d" % (lit, n_vars), lineno)
            else:
                pending.append(lit)
    if n_vars is None:
        raise DimacsError("missing header")
    if pending:
        raise DimacsError("missing terminating 0", lineno)
    if len(clauses) != n_expected:
        raise DimacsError("header announces %d clauses, found %d" % (n_expected, len(clauses)))
    return make_formula(n_vars, clauses)


def write_dimacs(f: Formula, comments: Sequence[str] = ()) -> bytes:
    out = ["c %s" % c for c in comments]
    out.append("p cnf %d %d" % (f.n_vars, f.m))
    out.extend(" ".join(str(l) for l in c) + " 0" for c in f.clauses)
    return ("\n".join(out) + "\n").encode("ascii")
