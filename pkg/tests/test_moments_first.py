from __future__ import annotations

import math

import numpy as np
import pytest

from ksat_lab.errors import DomainError, ValidationError
from ksat_lab.moments import (VARIANT_PLAIN, VARIANT_WEIGHTED, asymptotic_terms, first_moment_rate,
                              solve_first_moment, variant_gap)
from ksat_lab.moments.first import clause_terms, occupancy_terms, solve_red_scale
from ksat_lab.sp import regular_type_system
from ksat_lab.thresholds import bound_main
from ksat_lab.util.infotheory import kl_binary


def test_red_scale_solves_its_equation() -> None:
    a = np.array([[0.3], [0.05]])
    mult = np.array([[5.0], [40.0]])
    s = solve_red_scale(a, mult)
    assert np.allclose(s, 1.0 - (1.0 - a[:, 0] * s) ** mult[:, 0], atol=1e-14)
    assert np.all((s > 0) & (s < 1))


def test_red_scale_needs_more_than_one_red_clone() -> None:
    with pytest.raises(DomainError):
        solve_red_scale(np.array([[0.1]]), np.array([[5.0]]))
    assert solve_red_scale(np.array([[0.0]]), np.array([[0.0]])).tolist() == [0.0]


def test_clause_terms_at_independent_slots() -> None:
    q = np.full((1, 3), 0.5)
    red = np.full((1, 3), 0.125)
    e, gr, gc = clause_terms(q, red)
    assert gr.tolist() == [[0.125, 0.125, 0.125]]
    assert gc[0] == pytest.approx(0.5)
    assert np.allclose(e, 0.59375)


def test_fixed_point_residual_on_the_regular_system() -> None:
    k = 5
    d = round(k * bound_main(k) / 2)
    assert d == 53
    params = solve_first_moment(regular_type_system(k, d))
    assert params.residual <= 1e-10
    assert np.all((params.s > 0) & (params.s < 1))
    assert all(np.all((q > 0) & (q < 1)) for q in params.q_p)


def test_rate_is_the_sum_of_its_components() -> None:
    res = first_moment_rate(regular_type_system(6, 128))
    c = res.components
    assert res.rate == pytest.approx(c["entropy"] + c["occupancy"] + c["validity"])
    assert c["entropy"] > 0
    assert res.polylog_c == 1 + 3 + 128 * 5 / 2
    assert res.to_dict()["variant"] == VARIANT_WEIGHTED


def test_rate_decreases_with_the_degree() -> None:
    rates = [first_moment_rate(regular_type_system(6, d)).rate for d in (120, 125, 130, 135)]
    assert all(b < a for a, b in zip(rates, rates[1:]))


def test_variant_gap_is_not_positive() -> None:
    ts = regular_type_system(6, 128)
    params = solve_first_moment(ts)
    gap = variant_gap(ts, params)
    assert gap <= 0
    plain = first_moment_rate(ts, params, variant=VARIANT_PLAIN)
    weighted = first_moment_rate(ts, params, variant=VARIANT_WEIGHTED)
    assert weighted.rate - plain.rate == pytest.approx(gap)
    with pytest.raises(ValidationError):
        first_moment_rate(ts, params, variant="other")


def test_asymptotic_entropy_term() -> None:
    rep = asymptotic_terms(10, samples=2000)
    row = rep.row("entropy")
    assert row.ok
    assert row.claim == pytest.approx(math.log(2) + 2.0 ** -11)
    assert [r.name for r in rep.rows] == ["entropy", "occupancy", "validity", "validity_statement"]
    with pytest.raises(KeyError):
        rep.row("nope")
    with pytest.raises(ValidationError):
        asymptotic_terms(5)


@pytest.mark.parametrize("k", range(4, 15))
def test_fixed_point_residual_across_widths(k: int) -> None:
    params = solve_first_moment(regular_type_system(k, round(k * bound_main(k) / 2)))
    assert params.residual <= 1e-10


@pytest.mark.parametrize("k", range(8, 15))
def test_fixed_point_sits_in_its_asymptotic_window(k: int) -> None:
    ts = regular_type_system(k, round(k * bound_main(k) / 2))
    params = solve_first_moment(ts)
    block = ts.clause_blocks()[0]
    assert np.max(np.abs(params.q_p[0] - (block.purple - 2.0 ** (-k - 1)))) <= k * k * 2.0 ** (-1.5 * k)
    lt = ts.literal_table()
    assert np.max(np.abs(params.q_r - lt.red / lt.p1[:, None])) <= k * k * 4.0 ** (-k)


@pytest.mark.parametrize("k", [8, 10, 12])
def test_asymptotic_rows_hold(k: int) -> None:
    rep = asymptotic_terms(k, samples=2000)
    assert [r.name for r in rep.rows if not r.ok] == []
    assert len(rep.rows) == 4 and rep.truncation < 1e-3


def test_weighted_occupancy_scales_the_red_ratio_kl_by_the_purple_mass() -> None:
    ts = regular_type_system(6, 128)
    lt = ts.literal_table()
    params = solve_first_moment(ts)
    kl = (lt.mult * kl_binary(lt.red / lt.purple[:, None], params.q_r)).sum(axis=1)
    weighted = occupancy_terms(lt, params.q_r, VARIANT_WEIGHTED)
    plain = occupancy_terms(lt, params.q_r, VARIANT_PLAIN)
    assert np.allclose(weighted - plain, (lt.purple - 1.0) * kl, rtol=1e-12, atol=1e-15)
