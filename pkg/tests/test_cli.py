import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fracdelay.cli import main
from fracdelay.io import ProblemFileError, dump_problem, format_float, load_problem, parse_problem
from fracdelay.oracles import method_of_steps_oracle

DATA = Path(__file__).parent / "data"


def write(tmp_path, doc, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def base_doc(**over):
    doc = json.loads((DATA / "zero.json").read_text())
    doc.update(over)
    return doc


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])


def test_eval_y_identity_at_zero(tmp_path):
    out = tmp_path / "y.csv"
    assert main(["eval-y", "--problem", str(DATA / "zero.json"), "--gamma", "1", "--t", "0", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "Y_11", "Y_12", "Y_21", "Y_22"]
    assert rows.tolist() == [[0.0, 1.0, 0.0, 0.0, 1.0]]


def test_eval_y_scalar_example(tmp_path):
    doc = json.loads((DATA / "scalar.json").read_text())
    doc["Omega"] = {"d": 1, "data": [1.0]}
    doc["T"] = 2.0
    out = tmp_path / "y.csv"
    assert main(["eval-y", "--problem", write(tmp_path, doc), "--gamma", "1", "--grid", "0:1.5:4",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert rows[-1, 0] == 1.5
    assert rows[-1, 1] == pytest.approx(0.7340385, abs=5e-8)
    assert Path(out).read_text().splitlines()[-1] == "1.5,0.734038479732"


def test_eval_y_singular_start(tmp_path, capsys):
    out = tmp_path / "y.csv"
    code = main(["eval-y", "--problem", str(DATA / "zero.json"), "--gamma", "0.5", "--grid", "0:1:5", "--out", str(out)])
    assert code != 0
    assert "singular" in capsys.readouterr().err


def test_eval_y_bad_gamma(tmp_path):
    assert main(["eval-y", "--problem", str(DATA / "zero.json"), "--gamma", "0", "--t", "1",
                 "--out", str(tmp_path / "y.csv")]) == 2


def test_missing_key_exit_2(tmp_path, capsys):
    doc = base_doc()
    del doc["mu"]
    code = main(["solve", "--problem", write(tmp_path, doc), "--out", str(tmp_path / "z.csv")])
    assert code == 2
    assert '"mu"' in capsys.readouterr().err


def test_validation_messages_are_line_anchored(tmp_path):
    text = (DATA / "zero.json").read_text().replace('"h": 1.0', '"h": -1.0')
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ProblemFileError, match=r'line 2: key "h"'):
        load_problem(path)
    path.write_text('{\n  "mu": 1.5,\n  "nu": ]\n}')
    with pytest.raises(ProblemFileError, match="line 3"):
        load_problem(path)


@pytest.mark.parametrize("change,key", [
    (dict(A={"d": 2, "data": [1, 2, 3]}), "A"),
    (dict(c1=[1.0]), "c1"),
    (dict(f=[{"kind": "tan", "coeff": [1, 1], "exponent_or_frequency": 1}]), "f"),
    (dict(phi=[{"kind": "monomial", "coeff": [1, 1], "exponent_or_frequency": 0.5}]), "phi"),
    (dict(nu=1.5), "nu"),
    (dict(mu="1.5"), "mu"),
    (dict(grid={"n_points": 1}), "grid"),
])
def test_validation_names_key(change, key):
    with pytest.raises(ProblemFileError, match=f'"{key}"'):
        parse_problem(base_doc(**change))


def test_solve_zero_problem(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["solve", "--problem", str(DATA / "zero.json"), "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["t", "z_1", "z_2"]
    assert rows.shape == (21, 3) and not rows[:, 1:].any()


def test_solve_matches_steps_oracle(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["solve", "--problem", str(DATA / "generic_mu2.json"), "--out", str(out)]) == 0
    _, rows = read_csv(out)
    ref = method_of_steps_oracle(load_problem(DATA / "generic_mu2.json").problem, rows[:, 0]).values
    assert np.abs(rows[:, 1:] - ref).max() <= 1e-4


def test_solve_prints_uh_constant(tmp_path, capsys):
    assert main(["solve", "--problem", str(DATA / "scalar.json"), "--out", str(tmp_path / "z.csv"), "--uh"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("C = ")
    assert float(line[4:]) == pytest.approx(1 / math.gamma(2.5), rel=1e-10)
    assert float(line[4:]) == pytest.approx(0.752252778, abs=1e-9)


def test_solve_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["solve", "--problem", str(DATA / "generic_caputo.json"), "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_zero_problem(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--problem", str(DATA / "zero.json"), "--out", str(out)]) == 0
    reports = json.loads(out.read_text())
    assert {r["check"] for r in reports} == {"laplace", "residual"}
    assert all(r["passed"] for r in reports)
    doc = base_doc(mu=2.0)
    assert main(["verify", "--problem", write(tmp_path, doc), "--checks", "laplace,steps"]) == 0


def test_verify_steps_on_fractional_order(tmp_path, capsys):
    code = main(["verify", "--problem", str(DATA / "zero.json"), "--checks", "steps"])
    assert code == 3
    assert "mu = 2" in capsys.readouterr().err


def test_verify_unknown_check(tmp_path):
    assert main(["verify", "--problem", str(DATA / "zero.json"), "--checks", "magic"]) == 2


def test_verify_generic_laplace(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--problem", str(DATA / "generic_caputo.json"), "--checks", "laplace",
                 "--out", str(out)]) == 0
    (rep,) = json.loads(out.read_text())
    assert rep["max_residual"] <= 1e-4 and len(rep["points"]) == 5
    assert "laplace" in capsys.readouterr().out


def test_kernel_dump(tmp_path):
    out = tmp_path / "q.csv"
    assert main(["kernel-dump", "--problem", str(DATA / "generic_mu2.json"), "--kmax", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,m,i,j,value"
    assert len(lines) == 1 + 4 * (1 + 2 + 3 + 4)
    assert lines[1:5] == ["0,0,0,0,1", "0,0,0,1,0", "0,0,1,0,0", "0,0,1,1,1"]


def test_echo_config_round_trip(tmp_path):
    doc = json.loads((DATA / "generic_caputo.json").read_text())
    doc["h"] = 0.1 + 0.2
    doc["A"]["data"][1] = 1 / 3
    src = write(tmp_path, doc)
    echoed = tmp_path / "echo.json"
    assert main(["echo-config", "--problem", src, "--out", str(echoed)]) == 0
    first, second = load_problem(src), load_problem(echoed)
    p, q = first.problem, second.problem
    for name in ("mu", "nu", "h", "T"):
        assert getattr(p, name) == getattr(q, name)
    for name in ("a", "omega", "c1", "c2"):
        assert np.array_equal(getattr(p, name), getattr(q, name))
    assert p.phi == q.phi and p.f == q.f
    assert first.series == second.series and first.quad == second.quad
    assert dump_problem(second) == echoed.read_text()


def test_format_float():
    assert format_float(1 / 3) == "0.333333333333"
    assert format_float(-0.0) == "0"
    assert format_float(2.0) == "2"


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fracdelay.cli", "verify", "--problem", str(DATA / "zero.json"),
                           "--checks", "steps"], capture_output=True, text=True)
    assert proc.returncode == 3
