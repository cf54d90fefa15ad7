from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from ksat_lab.errors import DomainError
from ksat_lab.util import emit
from ksat_lab.util.checkpoint import Checkpoint, config_hash
from ksat_lab.util.infotheory import binary_entropy, check_prob, entropy, kl, kl_binary
from ksat_lab.util.parallel import chunked, pmap
from ksat_lab.util.products import excl1, excl2


def test_leave_out_products() -> None:
    x = np.array([2.0, 3.0, 0.0, 5.0])
    assert excl1(x).tolist() == [0.0, 0.0, 30.0, 0.0]
    y = np.array([[2.0, 3.0, 5.0], [1.0, 4.0, 7.0]])
    assert excl1(y).tolist() == [[15.0, 10.0, 6.0], [28.0, 7.0, 4.0]]
    e2 = excl2(np.array([2.0, 3.0, 5.0]))
    assert e2[0, 1] == 5.0 and e2[1, 2] == 2.0 and e2[0, 2] == 3.0
    assert np.allclose(np.diag(e2), [15.0, 10.0, 6.0])


def test_entropy_and_kl() -> None:
    assert entropy([0.5, 0.5]) == pytest.approx(np.log(2))
    assert entropy([1.0, 0.0]) == 0.0
    assert binary_entropy(0.5) == pytest.approx(np.log(2))
    assert kl([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2))
    assert kl_binary(0.5, 0.5) == 0.0
    assert kl_binary(0.25, 0.5) > 0


def test_check_prob() -> None:
    assert check_prob([0.2, 0.8]).tolist() == [0.2, 0.8]
    with pytest.raises(DomainError):
        check_prob([0.2, 0.7])
    with pytest.raises(DomainError):
        check_prob([-0.1, 1.1])


def test_chunked_and_pmap_keep_order() -> None:
    assert [list(c) for c in chunked(range(5), 2)] == [[0, 1], [2, 3], [4]]
    assert pmap(lambda v: v * v, list(range(10))) == [v * v for v in range(10)]


def test_jsonable_renders_exact_rationals() -> None:
    out = emit.jsonable({"r": Fraction(21, 5), "a": np.arange(3), "x": float("nan"), "s": {3, 1}})
    assert out == {"r": {"value": 4.2, "exact": "21/5"}, "a": [0, 1, 2], "x": None, "s": [1, 3]}
    with pytest.raises(TypeError):
        emit.jsonable(object())


def test_dumps_is_deterministic_and_tagged() -> None:
    text = emit.dumps({"b": 1, "a": 0.1})
    assert text == emit.dumps({"b": 1, "a": 0.1})
    assert json.loads(text) == {"schema": "ksat-lab/1", "b": 1, "a": 0.1}


def test_write_json_with_sidecar(tmp_path) -> None:
    path = tmp_path / "out.json"
    emit.write_json(str(path), {"v": 1}, meta={"command": "bounds"})
    assert json.loads(path.read_text())["v"] == 1
    side = json.loads((tmp_path / "out.json.meta.json").read_text())
    assert side["command"] == "bounds"
    assert side["generated_at"].endswith("+00:00")


def test_csv_text_uses_round_trip_floats() -> None:
    text = emit.csv_text(["x", "y"], [[1, 0.1], [2, 1 / 3]])
    assert text.splitlines() == ["x,y", "1,0.1", "2,%r" % (1 / 3)]


def test_checkpoint_resumes_only_for_the_same_config(tmp_path) -> None:
    path = str(tmp_path / "cp.json")
    cp = Checkpoint(path, {"k": 5})
    cp.put("10", {"xi": 0.5})
    again = Checkpoint(path, {"k": 5})
    assert "10" in again and again.get("10") == {"xi": 0.5}
    other = Checkpoint(path, {"k": 6})
    assert "10" not in other
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
