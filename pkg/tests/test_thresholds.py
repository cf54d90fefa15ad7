from __future__ import annotations

import pytest

from ksat_lab.errors import ValidationError
from ksat_lab.thresholds import (CSV_HEADER, bound_condensation, bound_first_moment, bound_lower_ap, bound_main,
                                 bound_sweep, report)


def test_closed_forms() -> None:
    assert bound_main(3) == pytest.approx(4.6986038, abs=1e-7)
    assert bound_main(10) == pytest.approx(708.9361385, abs=1e-7)
    assert bound_lower_ap(3) == pytest.approx(3.1588830, abs=1e-7)
    assert bound_condensation(3) == pytest.approx(4.5054566, abs=1e-7)
    assert bound_condensation(4) == pytest.approx(10.0506341, abs=1e-7)
    assert bound_first_moment(4) == pytest.approx(11.0903549, abs=1e-7)


def test_bounds_are_ordered() -> None:
    for k in range(3, 31):
        assert bound_lower_ap(k) < bound_condensation(k) < bound_main(k) < bound_first_moment(k)


@pytest.mark.parametrize("k", [2, 0, 3.5])
def test_small_or_fractional_k_is_rejected(k) -> None:
    with pytest.raises(ValidationError):
        bound_main(k)


def test_report_rows_follow_the_header() -> None:
    table = report(5)
    assert table.ordered
    assert table.kkks_upper == table.main
    assert table.gap == pytest.approx(table.main - table.ap_lower)
    assert len(table.row()) == len(CSV_HEADER)
    assert table.row()[-1] == ""
    assert table.to_dict()["leading_terms_only"] is True
    assert [t.k for t in bound_sweep([3, 4, 5])] == [3, 4, 5]


def test_report_with_the_regular_scan() -> None:
    table = report(6, with_regular=True)
    assert table.regular_dstar is not None
    assert table.regular_density == pytest.approx(2.0 * table.regular_dstar / 6)
