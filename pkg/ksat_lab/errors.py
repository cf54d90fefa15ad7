from __future__ import annotations
from typing import Optional


class KsatLabError(Exception):
    """Base class; `exit_code` is what the CLI returns for it."""
    exit_code = 1


class ValidationError(KsatLabError):
    exit_code = 1


class CapExceeded(ValidationError):
    def __init__(self, what: str, n: int, cap: int):
        super().__init__("%s: %d variables exceeds cap %d (raise it with --max-vars)" % (what, n, cap))
        self.n = n
        self.cap = cap


class DomainError(ValidationError):
    """Log-domain violation or input outside the asymptotic regime."""


class ConvergenceError(KsatLabError):
    def __init__(self, msg: str, residual: float):
        super().__init__("%s (best residual %.3e)" % (msg, residual))
        self.residual = residual


class DimacsError(ValidationError):
    def __init__(self, msg: str, line: Optional[int] = None):
        super().__init__(msg)
        self.msg = msg
        self.line = line

    def __str__(self) -> str:
        m = "DIMACS Exception: " + self.msg
        if self.line is not None:
            m += " Line %d." % self.line
        return m


class ContractViolation(KsatLabError):
    exit_code = 2
