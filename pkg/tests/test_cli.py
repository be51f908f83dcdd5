import json

import numpy as np
import pytest

from chebk import chebyshev as cb
from chebk import serialization as ser
from chebk.chebyshev import ChebPoly
from chebk.cli import format_grid, main, parse_spec, sample_grid
from chebk.errors import SpecParseError
from chebk.intervals import K1

K1_SPEC = [["-1", "-1/2"], ["-1/5", "1/5"], ["1/2", "1"]]
K2_SPEC = [["-1", "-1/2"], ["1/10", "1/5"], ["2/3", "1"]]
FIG_W = {"sigma": [1, 0, 1], "omega": [2, 0, -1], "basis": "monomial"}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(tmp_path, doc, *flags):
    spec = write(tmp_path, "spec.json", doc)
    out = str(tmp_path / "result.json")
    code = main(["run", spec, "--out", out, *flags])
    return code, (ser.load(out) if (tmp_path / "result.json").exists() else None)


def test_unit_interval_t_value(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": [["-1", "1"]], "N": 5})
    assert code == 0
    assert abs(doc["value"]["t_value"] - 0.0625) <= 1e-7
    assert len(doc["poly"]["chebyshev_T"]) == 6
    assert doc["poly"]["monomial"][5] == 1.0


def test_weighted_k1_lists_six_points(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "weight": FIG_W, "N": 5}, "--verify")
    assert code == 0
    assert len(doc["certificate"]["equioscillation"]) == 6
    assert all(doc["checks"].values())


def test_second_kind_delta_target(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb2", "intervals": K2_SPEC, "N": 5, "delta_target": 1e-3})
    assert code == 0
    assert doc["value"]["delta"] <= 1e-3
    heads = doc["certificate"]["moment_heads"]
    assert len(heads) == 3 and len(heads[0]["y_plus"]) == 11


def test_flags_override(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": K2_SPEC, "N": 3},
                    "--task", "cheb2", "--d", "12", "--tol", "1e-7", "--max-iter", "150")
    assert code == 0
    assert doc["task"]["task"] == "cheb2" and doc["value"]["d"] == 12
    assert doc["task"]["tol"] == 1e-7 and doc["task"]["max_iter"] == 150


def test_capacity_task(tmp_path):
    code, doc = run(tmp_path, {"task": "capacity", "intervals": [["-1", "1"]], "N": 2}, "--verify")
    assert code == 0
    assert doc["value"]["l2_norm"] == pytest.approx(np.sqrt(8 / 45), rel=1e-13)
    assert doc["checks"]["sandwich"]


def test_rounding_recorded(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": K2_SPEC, "N": 2})
    rec = doc["input"]["endpoint_rounding"]
    assert rec[2][0] == {"input": "2/3", "value": 2 / 3, "exact": False}
    assert rec[0][1]["exact"] is True


def test_round_trip_coefficients(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "weight": FIG_W, "N": 5})
    again = ser.loads(ser.dumps(doc))
    assert again == doc
    assert ser.dumps(again) == (tmp_path / "result.json").read_text()


def test_chebyshev_basis_weight(tmp_path):
    mono = {"task": "cheb1", "intervals": K1_SPEC, "weight": FIG_W, "N": 4}
    cheb_w = {"sigma": cb.monomial_to_cheb([1, 0, 1]).coeffs.tolist(),
              "omega": cb.monomial_to_cheb([2, 0, -1]).coeffs.tolist(), "basis": "chebyshev"}
    _, a = run(tmp_path, mono)
    _, b = run(tmp_path, dict(mono, weight=cheb_w))
    assert a["value"]["t_value"] == pytest.approx(b["value"]["t_value"], rel=1e-9)


@pytest.mark.parametrize("doc", [
    {"task": "cheb9", "intervals": [["-1", "1"]], "N": 2},
    {"task": "cheb1", "intervals": [["0", "0.5"], ["0.4", "1"]], "N": 2},
    {"task": "cheb1", "intervals": [["-1", "1"]], "N": 0},
    {"task": "cheb1", "intervals": [["-1", "1"]], "N": 2, "weight": {"sigma": [1], "omega": [0, 1]}},
    {"task": "cheb1", "intervals": [["-1", "1/0"]], "N": 2},
    {"task": "cheb2", "intervals": [["-1", "1"]], "N": 3, "d": 2},
])
def test_parse_errors_exit_1(tmp_path, doc):
    code, _ = run(tmp_path, doc)
    assert code == 1


def test_unreadable_spec_exit_1(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", str(bad)]) == 1


def test_solver_failure_exit_2(tmp_path):
    code, doc = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "N": 5}, "--max-iter", "2")
    assert code == 2 and doc is None


def test_verification_failure_exit_3(tmp_path):
    with pytest.warns(UserWarning, match="above target"):
        code, doc = run(tmp_path, {"task": "cheb2", "intervals": [["-1", "1"]], "N": 2, "d": 10,
                                   "delta_target": 1e-6, "d_max": 20})
    assert code == 3
    assert doc["status"] == "verification_failed" and doc["failed_checks"] == ["delta_target"]


def test_parse_spec_defaults():
    spec = parse_spec({"task": "cheb1", "intervals": [["-1", "1"]], "N": 3})
    assert spec.weight is None and spec.d is None and spec.K.L == 1
    with pytest.raises(SpecParseError):
        parse_spec([1, 2])


def test_sample_grid_constant():
    doc = {"format": "chebk-result", "task": {"task": "cheb2"},
           "input": {"intervals": [[-1.0, 1.0]], "weight": None},
           "poly": {"chebyshev_T": [0.75]}}
    header, rows = sample_grid(doc, 3)
    assert header == ["x", "P"]
    assert rows.shape == (3, 2) and np.all(rows[:, 1] == 0.75)


def test_sample_grid_unit_interval_endpoints(tmp_path):
    _, doc = run(tmp_path, {"task": "cheb1", "intervals": [["-1", "1"]], "N": 5})
    header, rows = sample_grid(doc, 11)
    assert header == ["x", "P", "+c*w", "-c*w"]
    t = doc["value"]["t_value"]
    assert abs(abs(rows[0, 1]) - t) <= 1e-7 and abs(abs(rows[-1, 1]) - t) <= 1e-7


def test_sample_grid_rows_and_weight(tmp_path):
    _, doc = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "weight": FIG_W, "N": 5})
    header, rows = sample_grid(doc, 9)
    assert rows.shape == (3 * 9, 4)
    x = rows[:, 0]
    w = (1 + x * x) / (2 - x * x)
    assert np.allclose(rows[:, 2], doc["value"]["t_value"] * w, rtol=1e-14)
    assert np.all(np.abs(rows[:, 1]) <= rows[:, 2] * (1 + 1e-6))


def test_sample_command_is_reproducible(tmp_path):
    code, _ = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "N": 4}, "--samples", "5")
    assert code == 0
    grid = (tmp_path / "result.csv").read_text()
    out = tmp_path / "again.csv"
    assert main(["sample", str(tmp_path / "result.json"), "--samples", "5", "--out", str(out)]) == 0
    assert out.read_text() == grid
    lines = grid.splitlines()
    assert lines[0] == "x,P,+c*w,-c*w" and len(lines) == 1 + 3 * 5
    vals = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    P = ChebPoly(ser.load(str(tmp_path / "result.json"))["poly"]["chebyshev_T"])
    assert np.array_equal(vals[:, 1], cb.evaluate(P, vals[:, 0]))


def test_sample_task_spec(tmp_path):
    run(tmp_path, {"task": "cheb1", "intervals": [["-1", "1"]], "N": 3})
    spec = write(tmp_path, "sample.json", {"task": "sample", "result": str(tmp_path / "result.json"),
                                            "samples": 4})
    out = tmp_path / "grid.csv"
    assert main(["run", spec, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_format_grid_precision():
    text = format_grid(["x", "P"], np.array([[1 / 3, 2.0]]), precision=5)
    assert text == "x,P\n0.33333,2\n"


def test_intervals_echo_matches_k1(tmp_path):
    _, doc = run(tmp_path, {"task": "cheb1", "intervals": K1_SPEC, "N": 2})
    assert doc["input"]["intervals"] == K1.as_lists()
