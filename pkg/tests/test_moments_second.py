from __future__ import annotations

import itertools

import numpy as np
import pytest

from ksat_lab.errors import ValidationError
from ksat_lab.formula import make_rng
from ksat_lab.moments import (check_affine, check_concavity, check_stationary, class_probabilities, feasible_basis,
                              fhat_at, first_moment_rate, is_tame, product_overlap, second_moment_f)
from ksat_lab.moments.overlap import PP, PY, YP, aggregate, layout_for
from ksat_lab.sp import regular_type_system


def _brute_classes(q: np.ndarray) -> dict:
    """Class probabilities by enumerating every joint slot assignment."""
    kappa = q.shape[0]
    out = {"rr": np.zeros(kappa), "rc": np.zeros(kappa), "cr": np.zeros(kappa), "ry": np.zeros(kappa),
           "yr": np.zeros(kappa), "yy": np.zeros((kappa, kappa)), "cc": 0.0}
    for cells in itertools.product(range(4), repeat=kappa):
        p = float(np.prod([q[j, c] for j, c in enumerate(cells)]))
        first = [j for j, c in enumerate(cells) if c in (PP, PY)]
        second = [j for j, c in enumerate(cells) if c in (PP, YP)]
        if not first or not second:
            continue
        if len(first) == 1 and len(second) == 1:
            j, jj = first[0], second[0]
            if j == jj:
                out["rr"][j] += p
            else:
                out["yy"][j, jj] += p
        elif len(first) == 1:
            j = first[0]
            out["rc" if j in second else "ry"][j] += p
        elif len(second) == 1:
            j = second[0]
            out["cr" if j in first else "yr"][j] += p
        else:
            out["cc"] += p
    return out


def test_class_probabilities_match_enumeration() -> None:
    rng = make_rng(11)
    for kappa in (2, 3, 4):
        q = rng.dirichlet(np.ones(4), size=kappa)
        g = class_probabilities(q)
        want = _brute_classes(q)
        for name in ("rr", "rc", "cr", "ry", "yr", "yy"):
            assert np.allclose(getattr(g, name), want[name], atol=1e-14), (kappa, name)
        assert g.cc == pytest.approx(want["cc"], abs=1e-14)


def test_product_overlap_is_exactly_feasible() -> None:
    ts = regular_type_system(5, 53)
    ov = product_overlap(ts)
    assert ov.exact
    rep = check_affine(ts, ov)
    assert rep.ok and rep.max_residual == 0
    lay = layout_for(ts)
    assert ov.to_dict()["size"] == lay.size


def test_feasible_subspace_of_the_regular_system() -> None:
    ts = regular_type_system(5, 53)
    fb = feasible_basis(ts)
    assert fb.dim == 6
    assert np.allclose(fb.point(np.zeros(fb.dim)), product_overlap(ts).vector())
    z = make_rng(0).standard_normal(fb.dim) * 1e-4
    moved = product_overlap(ts).moved(fb.point(z))
    assert check_affine(ts, moved, slack=1e-12).ok


def test_f_at_the_product_is_twice_the_first_moment() -> None:
    ts = regular_type_system(7, 286)
    res = second_moment_f(ts, product_overlap(ts))
    assert set(res.components) == {"ent", "disc", "val", "occ"}
    assert res.components["disc"] == pytest.approx(0.0, abs=1e-12)
    assert res.rate == pytest.approx(2.0 * first_moment_rate(ts).rate, abs=1e-8)
    assert res.residuals["second_moment"] <= 1e-10


def test_fhat_bounds_f_at_the_product() -> None:
    ts = regular_type_system(7, 286)
    ov = product_overlap(ts)
    assert fhat_at(ts, ov) >= second_moment_f(ts, ov).rate


def test_product_literal_joint_aggregates_to_the_slot_cells() -> None:
    ts = regular_type_system(5, 53)
    lay = layout_for(ts)
    x = product_overlap(ts).vector()
    slot = x[lay.clauses[0].slot]
    assert np.allclose(aggregate(x[lay.literal][0]), slot[0])


def test_second_moment_rejects_infeasible_or_foreign_overlaps() -> None:
    ts = regular_type_system(5, 53)
    ov = product_overlap(ts)
    x = ov.vector()
    x[0] += 1e-3
    with pytest.raises(ValidationError):
        second_moment_f(ts, ov.moved(x))
    with pytest.raises(ValidationError):
        second_moment_f(ts, product_overlap(regular_type_system(5, 54)))
    with pytest.raises(ValidationError):
        ov.moved(x[:-1])


def test_product_overlap_is_tame() -> None:
    ts = regular_type_system(7, 286)
    rep = is_tame(ts, feasible_basis(ts).center)
    assert rep.tame
    assert all(v == pytest.approx(0.0, abs=1e-15) for v in rep.deviations.values())
    assert rep.windows["yy_slot"] == pytest.approx(7.0 ** -4)


def test_product_is_stationary() -> None:
    ts = regular_type_system(7, 286)
    rep = check_stationary(ts, h_step=1e-5)
    assert rep.dim == 6
    assert rep.max_abs < 1e-6


def test_product_is_a_strict_local_maximum() -> None:
    ts = regular_type_system(7, 286)
    rep = check_concavity(ts, n_samples=0)
    assert rep.dim == 6
    assert rep.negative_definite
    assert rep.to_dict()["samples"] == 0


def test_concavity_holds_at_tame_samples_around_the_product() -> None:
    ts = regular_type_system(7, 286)
    rep = check_concavity(ts, n_samples=100, radius=1e-4, seed=3)
    assert rep.samples == 100 and rep.untame == 0
    assert len(rep.sample_max) == 100
    assert all(tr.tame for tr in rep.tame_reports)
    assert max(rep.sample_max) < 0
    assert rep.negative_definite


def test_red_class_curvature_dominates_the_slot_overlap() -> None:
    rq = check_concavity(regular_type_system(7, 286), n_samples=0).rayleigh
    assert rq["gamma_rr"] < 0 and rq["omega_pp"] < 0
    assert abs(rq["gamma_rr"]) > abs(rq["omega_pp"])
