"""Random regular k-SAT: the cover growth rate Xi(k, d) and the threshold degree d*."""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..errors import KsatLabError, ValidationError
from ..sp import regular_type_system
from ..thresholds import bound_main
from ..util.checkpoint import Checkpoint
from ..util.parallel import pmap
from .first import first_moment_rate

log = logging.getLogger("ksat-lab.moments")


def regular_xi(k: int, d: int, tol: Optional[float] = None) -> float:
    return first_moment_rate(regular_type_system(k, d), tol=tol).rate


def default_d_range(k: int) -> range:
    """Degrees from k(2^k ln2 - k)/2 up to just past the first-moment ceiling k 2^k ln2 / 2."""
    ln2 = math.log(2.0)
    lo = max(1, int(math.floor(k * (2 ** k * ln2 - k) / 2.0)))
    hi = int(math.ceil(k * 2 ** k * ln2 / 2.0)) + 1
    return range(lo, hi + 1)


@dataclass
class RegularScan:
    k: int
    points: List[Tuple[int, float]] = field(default_factory=list)
    skipped: List[Tuple[int, str]] = field(default_factory=list)
    d_star: Optional[int] = None
    monotone: bool = True

    @property
    def density_star(self) -> Optional[float]:
        return None if self.d_star is None else 2.0 * self.d_star / self.k

    @property
    def bracket(self) -> Tuple[float, float]:
        """Expected range of 2 d* / k: bound_main(k) - 2 up to the first-moment ceiling 2^k ln 2."""
        return bound_main(self.k) - 2.0, 2.0 ** self.k * math.log(2.0)

    @property
    def in_bracket(self) -> Optional[bool]:
        if self.density_star is None:
            return None
        lo, hi = self.bracket
        return lo <= self.density_star <= hi

    def to_dict(self) -> dict:
        return {"k": self.k, "d_star": self.d_star, "density_star": self.density_star,
                "monotone": self.monotone,
                "bracket": list(self.bracket), "in_bracket": self.in_bracket,
                "points": [{"d": d, "xi": xi} for d, xi in self.points],
                "skipped": [{"d": d, "reason": why} for d, why in self.skipped]}

    def rows(self) -> List[list]:
        return [[d, xi] for d, xi in self.points]


def regular_threshold(k: int, d_range: Optional[Sequence[int]] = None, *,
                      checkpoint: Optional[Checkpoint] = None) -> RegularScan:
    """Xi over an integer d scan; d* is the largest d with Xi >= 0.

    Degrees without an interior fixed point are skipped and logged.
    """
    ds = list(default_d_range(k) if d_range is None else d_range)
    if not ds:
        raise ValidationError("empty d range")

    def one(d: int):
        key = str(d)
        if checkpoint is not None and key in checkpoint:
            return checkpoint.get(key)
        try:
            out = {"xi": regular_xi(k, d)}
        except KsatLabError as e:
            out = {"skip": str(e)}
        if checkpoint is not None:
            checkpoint.put(key, out)
        return out

    scan = RegularScan(k)
    for d, res in zip(ds, pmap(one, ds)):
        if "xi" in res:
            scan.points.append((d, float(res["xi"])))
        else:
            log.info("k=%d d=%d skipped: %s", k, d, res["skip"])
            scan.skipped.append((d, res["skip"]))

    for (d0, x0), (d1, x1) in zip(scan.points, scan.points[1:]):
        if not x1 < x0:
            scan.monotone = False
            log.warning("Xi(%d, d) not decreasing between d=%d (%.6g) and d=%d (%.6g)", k, d0, x0, d1, x1)
    nonneg = [d for d, xi in scan.points if xi >= 0]
    scan.d_star = max(nonneg) if nonneg else None
    if scan.d_star is not None:
        log.info("k=%d: d* = %d (density %.6f)", k, scan.d_star, scan.density_star)
        lo, hi = scan.bracket
        if not scan.in_bracket:
            log.warning("k=%d: 2d*/k = %.4f outside [%.4f, %.4f]", k, scan.density_star, lo, hi)
    else:
        log.info("k=%d: no degree with Xi >= 0 in the scan", k)
    return scan
