"""Entropy and Kullback-Leibler divergence on probability vectors.

All functions accept anything numpy can turn into a float array and use the
convention 0 ln 0 = 0. `kl` allows an unnormalized second argument (the
clause-validity terms divide by sub-probability vectors).
"""
from __future__ import annotations
from typing import Sequence

import numpy as np
from scipy.special import entr, rel_entr

from ..errors import DomainError

PROB_TOL = 1e-12


def check_prob(p: Sequence[float], *, what: str = "vector", tol: float = PROB_TOL) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if np.any(a < -tol) or not np.all(np.isfinite(a)):
        raise DomainError("%s has negative or non-finite entries: %s" % (what, a))
    if abs(float(a.sum()) - 1.0) > tol * max(1, a.size):
        raise DomainError("%s does not sum to 1 (sum=%.17g)" % (what, a.sum()))
    return np.clip(a, 0.0, None)


def entropy(p: Sequence[float]) -> float:
    return float(np.sum(entr(np.asarray(p, dtype=float))))


def binary_entropy(y):
    y = np.asarray(y, dtype=float)
    return entr(y) + entr(1.0 - y)


def kl(p: Sequence[float], q: Sequence[float]) -> float:
    return float(np.sum(rel_entr(np.asarray(p, dtype=float), np.asarray(q, dtype=float))))


def kl_binary(x, q):
    """Elementwise KL(Be(x) || Be(q)); works on arrays."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    return rel_entr(x, q) + rel_entr(1.0 - x, 1.0 - q)
