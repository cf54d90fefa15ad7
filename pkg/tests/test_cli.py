from __future__ import annotations

import json

import pytest

from ksat_lab.cli import build_parser, main
from ksat_lab.commands import ALL_COMMANDS, run_selftest
from ksat_lab.formula import read_dimacs
from ksat_lab.sp import CloneDistribution, lambda_map


def _dimacs(tmp_path, text: str, name: str = "f.cnf") -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def test_every_command_is_registered() -> None:
    names = [c.name for c in ALL_COMMANDS]
    assert len(names) == len(set(names)) == 14
    assert build_parser().parse_args(["bounds", "--k", "3"]).handler.name == "bounds"


@pytest.mark.parametrize("argv", [[], ["nope"], ["bounds"], ["bounds", "--k", "x"], ["gen", "--k", "3", "--n", "5",
                                                                                       "--r", "abc"]])
def test_usage_errors_exit_1(argv) -> None:
    assert main(argv) == 1


def test_bounds_json_and_csv(tmp_path) -> None:
    out, csv = tmp_path / "b.json", tmp_path / "b.csv"
    assert main(["bounds", "--k", "3", "--out", str(out), "--csv", str(csv)]) == 0
    data = _json(out)
    assert data["schema"] == "ksat-lab/1"
    assert data["main"] == pytest.approx(4.6986038, abs=1e-7)
    assert data["ordered"] is True
    assert csv.read_text().splitlines()[0] == "k,main,ap_lower,condensation,first_moment,gap,regular_dstar"
    meta = _json(str(out) + ".meta.json")
    assert meta["command"] == "bounds" and meta["args"]["k"] == 3


def test_bounds_rejects_small_k(tmp_path) -> None:
    assert main(["bounds", "--k", "2", "--out", str(tmp_path / "b.json")]) == 1


def test_gen_is_deterministic(tmp_path) -> None:
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    argv = ["gen", "--k", "3", "--n", "20", "--r", "4.2", "--seed", "7"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    f = read_dimacs(a.read_bytes())
    assert f.n_vars == 20 and f.m == 84
    assert (tmp_path / "a.cnf.meta.json").exists()


def test_gen_regular_with_majority(tmp_path) -> None:
    out, maj = tmp_path / "r.cnf", tmp_path / "maj.json"
    assert main(["gen", "--k", "3", "--n", "12", "--d", "2", "--majority", str(maj), "--out", str(out)]) == 0
    assert read_dimacs(out.read_bytes()).m == 16
    assert "majority_vote" in _json(maj)


def test_prune_writes_formula_and_report(tmp_path) -> None:
    path = _dimacs(tmp_path, "p cnf 6 80\n" + "1 2 3 0\n" * 78 + "1 2 4 0\n4 5 6 0\n")
    out, rep = tmp_path / "p.cnf", tmp_path / "rep.json"
    assert main(["prune", "--dimacs", path, "--k", "3", "--r", "1/1000", "--report", str(rep),
                 "--out", str(out)]) == 0
    assert read_dimacs(out.read_bytes()).clauses == ((4,), (4, 5, 6))
    data = _json(rep)
    assert data["prune"]["removed_vars"] == [1, 2, 3]


def test_covers_counts_and_checks(tmp_path) -> None:
    path = _dimacs(tmp_path, "p cnf 3 1\n1 2 3 0\n")
    out = tmp_path / "c.json"
    assert main(["covers", "--dimacs", path, "--shades", "--out", str(out)]) == 0
    data = _json(out)
    assert data["count"] == 7 and data["shades"] == 7 and data["bijection"] is True
    assert main(["covers", "--dimacs", path, "--check", "100", "--out", str(out)]) == 0
    data = _json(out)
    assert data["verdict"]["ok"] is True
    assert data["critical_clauses"] == [0]
    assert data["shade"] == {"1:1": "r", "2:1": "y", "3:1": "y"}


def test_covers_respects_the_variable_cap(tmp_path) -> None:
    path = _dimacs(tmp_path, "p cnf 3 1\n1 2 3 0\n")
    assert main(["covers", "--dimacs", path, "--max-vars", "2", "--out", str(tmp_path / "c.json")]) == 1


def test_missing_input_is_an_io_failure(tmp_path) -> None:
    assert main(["covers", "--dimacs", str(tmp_path / "missing.cnf"), "--out", str(tmp_path / "c.json")]) == 1


def test_bad_dimacs_is_a_validation_error(tmp_path) -> None:
    path = _dimacs(tmp_path, "p cnf 2 1\n1 5 0\n")
    assert main(["covers", "--dimacs", path, "--out", str(tmp_path / "c.json")]) == 1


def test_extend_reports_the_residual(tmp_path) -> None:
    path = _dimacs(tmp_path, "p cnf 3 4\n1 2 3 0\n1 -2 3 0\n-1 2 3 0\n-1 -2 3 0\n")
    out = tmp_path / "e.json"
    assert main(["extend", "--dimacs", path, "--cover", "***", "--oracle", "--out", str(out)]) == 0
    data = _json(out)
    assert data["extendible"] is False
    assert data["discrepancy"] is True
    assert data["cover"] == "***"


def test_sp_marginals_exact_values(tmp_path) -> None:
    out = tmp_path / "sp.json"
    assert main(["sp-marginals", "--k", "3", "--delta", "0,500", "--clause", "0,0,0", "--out", str(out)]) == 0
    data = _json(out)
    assert len(data["points"]) == 1
    assert data["points"][0]["signature"]["p1"] == {"value": 0.46875, "exact": "15/32"}
    assert len(data["clause"]["clones"]) == 3


def test_types_on_a_regular_system(tmp_path) -> None:
    out = tmp_path / "t.json"
    assert main(["types", "--regular", "16", "--k", "4", "--out", str(out)]) == 0
    data = _json(out)
    assert data["identity"]["ok"] is True and data["ty"]["ok"] is True
    assert data["types"]["polylog_C"]["exact"] == "27/1"
    assert main(["types", "--regular", "16", "--out", str(out)]) == 1


def test_first_moment_command(tmp_path) -> None:
    out = tmp_path / "fm.json"
    assert main(["first-moment", "--regular", "53", "--k", "5", "--out", str(out)]) == 0
    data = _json(out)
    assert data["result"]["residuals"]["first_moment"] <= 1e-10
    assert data["variant_gap"] <= 0


def test_psi_scan_command(tmp_path) -> None:
    out, csv = tmp_path / "psi.json", tmp_path / "psi.csv"
    assert main(["psi-scan", "--k", "10", "--grid", "200", "--out", str(out), "--csv", str(csv)]) == 0
    data = _json(out)
    assert data["middle_ground"]["max"] < 0
    assert data["boundary"]["psi"] == pytest.approx(1.36572e-3, abs=2e-7)
    assert data["boundary"]["within"] is False
    assert len(csv.read_text().splitlines()) == 201


def test_empirical_needs_a_bracket(tmp_path) -> None:
    assert main(["empirical", "--k", "3", "--n", "10", "--out", str(tmp_path / "e.json")]) == 1


def test_empirical_curve(tmp_path) -> None:
    out = tmp_path / "e.json"
    assert main(["empirical", "--k", "3", "--n", "12", "--trials", "5", "--curve", "1,8",
                 "--out", str(out)]) == 0
    data = _json(out)
    assert [p["r"] for p in data["curve"]] == [1.0, 8.0]


def test_selftest_passes() -> None:
    rep = run_selftest(0)
    assert rep.passed, [s.to_dict() for s in rep.suites if not s.passed]
    assert [s.name for s in rep.suites] == ["cover_bijection", "two_sat_equivalence", "fixed_point_residuals",
                                            "type_identity", "closed_form_bounds"]


def test_selftest_catches_a_broken_clone_map() -> None:
    def halve_red(signatures, k=None):
        return [CloneDistribution(d.pr / 2, d.pb + d.pr / 2, d.pg, d.py) for d in lambda_map(signatures, k=k)]

    rep = run_selftest(0, lam=halve_red)
    assert not rep.passed
    failed = [s.name for s in rep.suites if not s.passed]
    assert failed == ["type_identity"]
