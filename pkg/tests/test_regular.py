from __future__ import annotations

import math

import pytest

from ksat_lab.errors import ValidationError
from ksat_lab.moments import regular_threshold, regular_xi
from ksat_lab.moments.regular import default_d_range
from ksat_lab.thresholds import bound_main
from ksat_lab.util.checkpoint import Checkpoint


def test_default_range_brackets_the_first_moment_ceiling() -> None:
    ds = default_d_range(7)
    assert ds[0] == 286
    assert ds[-1] == math.ceil(7 * 2 ** 7 * math.log(2) / 2) + 1


@pytest.mark.parametrize("k", [6, 8, 10])
def test_xi_changes_sign_across_the_default_range(k: int) -> None:
    ds = default_d_range(k)
    assert regular_xi(k, ds[0]) > 0
    assert regular_xi(k, ds[-1]) < 0


def test_threshold_degree_for_k6() -> None:
    scan = regular_threshold(6)
    assert scan.d_star is not None
    assert scan.monotone
    assert not scan.skipped
    gap = 2 ** 6 * math.log(2) - scan.density_star
    assert 0 < gap < 6
    assert scan.to_dict()["d_star"] == scan.d_star
    xi = dict(scan.points)
    assert xi[scan.d_star] >= 0 > xi[scan.d_star + 1]


def test_scan_resumes_from_a_checkpoint(tmp_path) -> None:
    path = str(tmp_path / "xi.json")
    ds = [120, 125, 130]
    first = regular_threshold(6, ds, checkpoint=Checkpoint(path, {"k": 6}))
    again = Checkpoint(path, {"k": 6})
    assert all(str(d) in again for d in ds)
    second = regular_threshold(6, ds, checkpoint=again)
    assert second.points == first.points
    assert second.rows() == [[d, xi] for d, xi in first.points]


def test_empty_range_is_rejected() -> None:
    with pytest.raises(ValidationError):
        regular_threshold(6, [])


@pytest.mark.parametrize("k", [7, 8, 9, 10, 11, 12])
def test_threshold_degree_against_the_bracket(k: int) -> None:
    lo = int(math.floor(k * (bound_main(k) - 6) / 2))
    hi = int(math.ceil(k * 2 ** k * math.log(2) / 2)) + 1
    scan = regular_threshold(k, range(lo, hi + 1))
    assert scan.d_star is not None and scan.monotone
    xi = dict(scan.points)
    assert xi[scan.d_star] >= 0 > xi[scan.d_star + 1]
    low, high = scan.bracket
    assert low == pytest.approx(bound_main(k) - 2)
    assert scan.density_star <= high
    # the crossing sits up to a few units of density under bound_main(k) - 2
    assert scan.density_star > low - 3
    assert scan.in_bracket == (low <= scan.density_star)
    assert scan.to_dict()["in_bracket"] == scan.in_bracket
