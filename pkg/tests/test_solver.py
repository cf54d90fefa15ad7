from __future__ import annotations

import pytest

from ksat_lab.errors import CapExceeded, ValidationError
from ksat_lab.formula import evaluate, gen_uniform, make_formula
from ksat_lab.solver import (SAT, UNKNOWN, UNSAT, SatEstimate, brute_force_sat, dpll_solve, empirical_threshold,
                             estimate_sat_probability, model_array, monotone_violations, regular_sat_curve,
                             sat_probability_curve, transition_width)
from ksat_lab.util.checkpoint import Checkpoint


def _est(r: float, fraction: float, stderr: float = 0.01) -> SatEstimate:
    return SatEstimate(r, fraction, stderr, 0, 0, 0, 0)


def test_model_array_order_and_cap() -> None:
    f = make_formula(2, [(1, 2)])
    assert model_array(f).tolist() == [[1, 0], [0, 1], [1, 1]]
    assert brute_force_sat(make_formula(1, [(1,), (-1,)])) == []
    with pytest.raises(CapExceeded):
        model_array(make_formula(3, [(1, 2, 3)]), cap=2)


def test_dpll_agrees_with_brute_force() -> None:
    for seed in range(150):
        n = 4 + seed % 7
        f = gen_uniform(3, n, int(4.3 * n) + seed % 3, seed)
        res = dpll_solve(f)
        models = brute_force_sat(f)
        assert (res.status == SAT) == bool(models), seed
        if res.status == SAT:
            assert evaluate(f, res.assignment)


def test_dpll_handles_tautologies_and_units() -> None:
    assert dpll_solve(make_formula(2, [(1, -1), (2,)])).status == SAT
    assert dpll_solve(make_formula(1, [(1,), (-1,)])).status == UNSAT
    assert dpll_solve(make_formula(3, [])).assignment == {1: 1, 2: 1, 3: 1}


def test_dpll_timeout_reports_unknown() -> None:
    res = dpll_solve(gen_uniform(3, 60, 250, seed=1), timeout=1e-9)
    assert res.status == UNKNOWN and res.assignment is None


def test_estimate_sat_probability_extremes() -> None:
    low = estimate_sat_probability(3, 20, 1, trials=20, seed=3)
    high = estimate_sat_probability(3, 20, 10, trials=20, seed=3)
    assert low.fraction == 1.0 and low.stderr == 0.0
    assert high.fraction == 0.0
    assert low.m == 20 and high.m == 200
    with pytest.raises(ValidationError):
        estimate_sat_probability(3, 20, 1, trials=0, seed=3)


def test_sat_probability_curve_is_deterministic() -> None:
    a = sat_probability_curve(3, 15, [2, 4, 8], trials=15, seed=5)
    b = sat_probability_curve(3, 15, [2, 4, 8], trials=15, seed=5)
    assert [e.to_dict() for e in a] == [e.to_dict() for e in b]
    assert a[0].fraction >= a[-1].fraction


def test_regular_sat_curve_uses_regular_clause_counts() -> None:
    pts = regular_sat_curve(3, 12, [3, 6], trials=4, seed=0)
    assert [d for d, _ in pts] == [3, 6]
    assert pts[0][1].m == 24 and pts[1][1].m == 48
    assert pts[0][1].r == pytest.approx(2.0)


def test_monotone_violations_and_width() -> None:
    curve = [_est(1.0, 1.0), _est(2.0, 0.9), _est(3.0, 0.5), _est(4.0, 0.1), _est(5.0, 0.0)]
    assert monotone_violations(curve) == []
    assert transition_width(curve) == pytest.approx(2.0)
    bumpy = curve + [_est(4.5, 0.6)]
    assert (4.0, 4.5) in monotone_violations(bumpy)


def test_empirical_threshold_bisects_and_resumes(tmp_path) -> None:
    path = str(tmp_path / "cp.json")
    cfg = {"k": 3, "n": 25}
    est = empirical_threshold(3, 25, 12, 2.0, 7.0, 1.0, seed=1, checkpoint=Checkpoint(path, cfg))
    assert 2.0 < est.estimate < 7.0
    assert len(est.curve) >= 4
    again = empirical_threshold(3, 25, 12, 2.0, 7.0, 1.0, seed=1, checkpoint=Checkpoint(path, cfg))
    assert again.estimate == est.estimate
    assert [e.to_dict() for e in again.curve] == [e.to_dict() for e in est.curve]


def test_empirical_threshold_validates() -> None:
    with pytest.raises(ValidationError):
        empirical_threshold(3, 10, 5, 4.0, 4.0, 0.1)
    with pytest.raises(ValidationError):
        empirical_threshold(3, 10, 5, 3.0, 4.0, 0.0)
