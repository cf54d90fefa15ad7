from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from ksat_lab.cover import cover_map, shade_from_cover
from ksat_lab.errors import DomainError, ValidationError
from ksat_lab.formula import gen_regular, gen_uniform
from ksat_lab.sp import (MODE_DEGREE_PAIR, CloneDistribution, assign_types, check_ty, check_type_identity,
                         degree_ensemble, is_theta_shade, lambda_map, poisson_type_ensemble, poisson_window,
                         regime_ok, regular_ensemble, regular_type_system, sp_marginal)
from ksat_lab.thresholds import bound_main


def _halve_red(signatures, k=None):
    """Clone map with half of every red mass moved to blue."""
    return [CloneDistribution(d.pr / 2, d.pb + d.pr / 2, d.pg, d.py) for d in lambda_map(signatures, k=k)]


def test_sp_marginal_at_zero_delta() -> None:
    sig = sp_marginal(3, 0)
    assert (sig.p1, sig.p0, sig.pstar) == (Fraction(15, 32), Fraction(15, 32), Fraction(1, 16))
    assert (float(sig.p1), float(sig.p0), float(sig.pstar)) == (0.46875, 0.46875, 0.0625)


def test_sp_marginal_mirror_symmetry() -> None:
    for k in (3, 5, 8):
        for delta in range(-7, 8):
            a, b = sp_marginal(k, delta), sp_marginal(k, -delta)
            assert a.p1 == b.p0 and a.pstar == b.pstar


def test_sp_marginal_regime() -> None:
    assert regime_ok(3, 152) and not regime_ok(3, 153)
    with pytest.raises(DomainError):
        sp_marginal(3, 200)
    with pytest.raises(ValidationError):
        sp_marginal(1, 0)


def test_lambda_map_identity_is_exact() -> None:
    sigs = [sp_marginal(4, d) for d in (0, 3, -2, 5)]
    dists = lambda_map(sigs, k=4)
    for j, d in enumerate(dists):
        others = Fraction(1)
        for jj, s in enumerate(sigs):
            if jj != j:
                others *= s.p0
        assert d.pr == sigs[j].purple * others
        assert d.pr + d.pb == sigs[j].p1 and d.pg == sigs[j].pstar and d.py == sigs[j].p0


def test_lambda_map_width_check() -> None:
    with pytest.raises(ValidationError):
        lambda_map([sp_marginal(4, 0)], k=4)
    with pytest.raises(ValidationError):
        lambda_map([])
    assert len(lambda_map([sp_marginal(4, 0)] * 2, k=4)) == 2


def test_regular_type_system_shape() -> None:
    ts = regular_type_system(4, 16)
    assert ts.density == Fraction(8)
    assert ts.neg == [0] and ts.exchangeable
    assert check_type_identity(ts).ok
    assert check_ty(ts).ok
    assert sum(w for _, _, w in ts.partners(0, 1)) == 1
    assert len(ts.partners(0, 1)) == 4
    assert ts.polylog_c() == Fraction(27)


def test_mutated_lambda_breaks_the_identity() -> None:
    rep = check_type_identity(regular_type_system(4, 16, lam=_halve_red))
    assert not rep.ok
    assert len(rep.violations) == 4


def test_assign_types_on_random_formula() -> None:
    f = gen_uniform(5, 30, 60, seed=8)
    ts = assign_types(f, 5, 2)
    n = len(f.variables())
    assert ts.n == n and ts.m == 60
    assert ts.density == Fraction(60, n)
    assert sum(ts.literal_weights) == 1
    assert sum(ts.clause_weights) == 1
    assert all(ts.neg[ts.neg[t]] == t for t in range(len(ts.neg)))
    assert check_type_identity(ts).ok
    assert check_ty(ts).ok
    for t, lt in enumerate(ts.literal_types):
        for h in range(1, lt.degree + 1):
            assert sum(w for _, _, w in ts.partners(t, h)) == 1


@pytest.mark.parametrize("k, d, n, seed", [(3, 3, 4, 1), (4, 6, 8, 3)])
def test_regular_formula_has_one_literal_and_one_clause_type(k, d, n, seed) -> None:
    f = gen_regular(k, d, n, seed=seed)
    ts = assign_types(f, k, Fraction(2 * d, k))
    assert len(ts.literal_types) == 1 and len(ts.clause_types) == 1
    assert ts.literal_weights == [1] and ts.clause_weights == [1]
    assert ts.exchangeable and ts.neg == [0]
    assert ts.clause_of == [0] * f.m
    reference = regular_type_system(k, d)
    assert ts.polylog_c() == reference.polylog_c()
    assert np.allclose(ts.literal_table().red, reference.literal_table().red)
    assert sum(w for _, _, w in ts.partners(0, 1)) == 1
    assert check_type_identity(ts).ok


def test_degree_pair_mode_groups_more_coarsely() -> None:
    f = gen_uniform(5, 30, 60, seed=8)
    full = assign_types(f, 5, 2)
    coarse = assign_types(f, 5, 2, mode=MODE_DEGREE_PAIR)
    assert len(coarse.literal_types) <= len(full.literal_types)
    assert check_type_identity(coarse).ok


def test_assign_types_validates() -> None:
    f = gen_uniform(5, 30, 60, seed=8)
    with pytest.raises(ValidationError):
        assign_types(f, 5, 2, mode="nope")


def test_theta_shade_check_uses_slack() -> None:
    f = gen_uniform(5, 20, 30, seed=2)
    ts = assign_types(f, 5, Fraction(3, 2))
    s = shade_from_cover(f, cover_map("*" * 20))
    assert not is_theta_shade(f, ts, s, 0, rounding=0).ok
    assert is_theta_shade(f, ts, s, 1, rounding=0).ok


def test_poisson_window_and_ensemble() -> None:
    k = 8
    r = bound_main(k)
    lo, hi = poisson_window(k, r)
    lam = k * r / 2
    assert lo < lam < hi
    ts = poisson_type_ensemble(k, r, samples=2000, seed=1)
    assert not ts.explicit
    assert check_type_identity(ts).ok
    lt = ts.literal_table()
    assert lt.weight.sum() == pytest.approx(1.0)
    assert 0.0 <= ts.truncation < 1e-3
    assert ts.clause_blocks()[0].weight.sum() == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        poisson_type_ensemble(2, r)


@pytest.mark.parametrize("k", [6, 8, 10])
def test_ensemble_yellow_mean_matches_the_closed_form(k) -> None:
    ts = poisson_type_ensemble(k, bound_main(k), samples=500)
    s = (1 - 3 * 2.0 ** (-k - 1)) / 2
    assert ts.sp_yellow_mean == pytest.approx(s, abs=1e-6)
    assert abs(ts.yellow_slot_mean - ts.sp_yellow_mean) <= ts.truncation + 1e-12
    assert ts.to_dict()["sp_yellow_mean"] == ts.sp_yellow_mean


def test_regular_ensemble_matches_the_explicit_system() -> None:
    ts = regular_ensemble(6, 200)
    ex = regular_type_system(6, 200)
    lt, lx = ts.literal_table(), ex.literal_table()
    assert lt.p1 == pytest.approx(lx.p1)
    assert lt.red[0, 0] == pytest.approx(lx.red[0, 0])
    assert lt.mult.sum() == pytest.approx(lx.mult.sum())
    assert np.allclose(ts.clause_blocks()[0].red, ex.clause_blocks()[0].red)


def test_degree_ensemble_support_check() -> None:
    with pytest.raises(ValidationError):
        degree_ensemble(5, 10.0, lambda ds: np.ones(len(ds)), (0, 4))
