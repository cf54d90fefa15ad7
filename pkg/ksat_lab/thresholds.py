"""Closed-form threshold bounds for random k-SAT.

Only the leading expressions are tabulated; the o_k(1) corrections are not
part of any value here.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from . import config
from .errors import ValidationError

log = logging.getLogger("ksat-lab.thresholds")

LN2 = math.log(2.0)


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 3:
        raise ValidationError("threshold bounds need an integer k >= 3, got %r" % (k,))


def bound_first_moment(k: int) -> float:
    """2^k ln 2, where the expected number of satisfying assignments vanishes."""
    _check_k(k)
    return 2.0 ** k * LN2


def bound_main(k: int) -> float:
    _check_k(k)
    return 2.0 ** k * LN2 - (1.0 + LN2) / 2.0


def bound_lower_ap(k: int) -> float:
    _check_k(k)
    return 2.0 ** k * LN2 - k * LN2 / 2.0 - (1.0 + LN2 / 2.0)


def bound_condensation(k: int) -> float:
    _check_k(k)
    return 2.0 ** k * LN2 - 1.5 * LN2


@dataclass
class BoundTable:
    k: int
    main: float
    kkks_upper: float
    ap_lower: float
    condensation: float
    first_moment: float
    eps_k: float
    regular_dstar: Optional[int] = None
    regular_density: Optional[float] = None

    @property
    def gap(self) -> float:
        return self.main - self.ap_lower

    @property
    def ordered(self) -> bool:
        return self.ap_lower < self.condensation < self.main

    def to_dict(self) -> dict:
        return {"k": self.k, "main": self.main, "kkks_upper": self.kkks_upper, "ap_lower": self.ap_lower,
                "condensation": self.condensation, "first_moment": self.first_moment, "gap": self.gap,
                "eps_k": self.eps_k, "ordered": self.ordered, "regular_dstar": self.regular_dstar,
                "regular_density": self.regular_density, "leading_terms_only": True}

    def row(self) -> list:
        return [self.k, self.main, self.ap_lower, self.condensation, self.first_moment, self.gap,
                self.regular_dstar if self.regular_dstar is not None else ""]


CSV_HEADER = ["k", "main", "ap_lower", "condensation", "first_moment", "gap", "regular_dstar"]


def report(k: int, *, with_regular: bool = False) -> BoundTable:
    _check_k(k)
    table = BoundTable(k=k, main=bound_main(k), kkks_upper=bound_main(k), ap_lower=bound_lower_ap(k),
                       condensation=bound_condensation(k), first_moment=bound_first_moment(k),
                       eps_k=config.eps_k(k))
    if with_regular:
        from .moments.regular import regular_threshold

        scan = regular_threshold(k)
        table.regular_dstar = scan.d_star
        if scan.d_star is not None:
            table.regular_density = 2.0 * scan.d_star / k
    if not table.ordered:
        log.warning("k=%d: bounds out of order (ap=%.6f cond=%.6f main=%.6f)",
                    k, table.ap_lower, table.condensation, table.main)
    return table


def bound_sweep(ks: Sequence[int], *, with_regular: bool = False) -> List[BoundTable]:
    return [report(k, with_regular=with_regular) for k in ks]
