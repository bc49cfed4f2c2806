import json
import subprocess
import sys

import numpy as np
import pytest

from bettersol.cli import SUBCOMMANDS, build_parser, main


def test_help_lists_everything(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for cmd in SUBCOMMANDS:
        assert cmd in out
    assert main(["table4", "--help"]) == 0
    out = capsys.readouterr().out
    for flag in ("--seed", "--reps", "--scale", "--out", "--format", "--threads", "--p", "--full"):
        assert flag in out


@pytest.mark.parametrize("argv", [
    ["table9"], ["table1", "--bogus"], ["table1", "--scale", "0"], ["table1", "--scale", "2"],
    ["table1", "--reps", "10", "--scale", "0.01"], ["table1", "--seed", "-1"],
    ["table1", "--format", "xml"], [],
])
def test_flag_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_runtime_error_exits_two(tmp_path, capsys):
    assert main(["lts", str(tmp_path / "missing.csv"), "--m", "3"]) == 2
    blocked = tmp_path / "file"
    blocked.write_text("")
    assert main(["table4", "--p", "100", "--reps", "2", "--out", str(blocked / "sub")]) == 2
    assert main(["table4", "--p", "20000", "--reps", "2"]) == 2


def test_table_outputs_are_byte_identical(tmp_path, capsys):
    args = ["table1", "--reps", "40", "--seed", "11"]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    for name in ("table1.csv", "table1.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    doc = json.loads((tmp_path / "a" / "table1.json").read_text())
    assert len(doc["cells"]) == 54
    out = capsys.readouterr().out
    assert "PASS" in out or "FAIL" in out


def test_scale_keeps_layout(tmp_path, capsys):
    assert main(["table3", "--scale", "0.001", "--format", "csv"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1 + 12


def test_table4_p_flag(capsys):
    assert main(["table4", "--p", "100", "--p", "200", "--reps", "20", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {c["column"] for c in doc["cells"]} == {"p=100", "p=200"}


def test_audit(tmp_path, capsys):
    assert main(["audit", "--reps", "100", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "audit.json").read_text())
    assert sum(doc[k] for k in ("better_only", "worse_only", "both", "neither")) == 100
    assert main(["audit", "--reps", "20", "--objective", "lts", "--format", "json"]) == 0


def test_one_shot_commands(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 2))
    y = X @ [1.0, -1.0] + 0.1 * rng.standard_normal(30)
    y[:5] += 20
    path = tmp_path / "xy.csv"
    np.savetxt(path, np.column_stack([X, y]), delimiter=",")
    assert main(["lts", str(path), "--m", "12", "--budget", "300"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert np.allclose(fit["coefficients"], [1.0, -1.0], atol=0.2)
    assert not set(fit["subset"]) & set(range(5))

    wide = tmp_path / "wide.csv"
    Xw = rng.standard_normal((40, 60))
    np.savetxt(wide, np.column_stack([Xw, 3 * Xw[:, 7] + rng.standard_normal(40)]), delimiter=",")
    assert main(["screen", str(wide), "--M", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert 7 in doc["SIS"]["selected"] and 7 in doc["LAR"]["selected"]

    vals = tmp_path / "x.txt"
    np.savetxt(vals, np.r_[rng.standard_normal(19), 100.0])
    assert main(["locate", str(vals), "--family", "cauchy"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["better"]["choice"] in ("median", "trimmed")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bettersol", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "table1" in res.stdout
    res = subprocess.run([sys.executable, "-m", "bettersol", "nope"], capture_output=True, text=True)
    assert res.returncode == 1


def test_parser_builds():
    assert build_parser().prog == "bettersol"
