import json
import math
import subprocess
import sys

import pytest

from gmseries.cli import main, parse_grid

HARMONIC = '{"name": "harmonic"}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    assert parse_grid("16:4096:2") == [2 ** j for j in range(4, 13)]
    assert parse_grid("10:100:1.5") == [10, 15, 22, 34, 51, 76]
    assert parse_grid("3,5,9") == [3, 5, 9]


def test_classify_harmonic_gm(capsys, tmp_path):
    out = tmp_path / "h.json"
    code, _, _ = run(capsys, "classify", "--generator", HARMONIC, "--class", "GM", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["verdict"] == "consistent"


def test_classify_remark6_gm_b6(capsys):
    code, out, _ = run(capsys, "classify", "--generator", '{"name": "remark6", "params": {"r": 3}}',
                       "--class", "GM(b6,2)", "--beta", '{"variant": "b6", "c": 2, "horizon": 131072}')
    assert code == 3
    assert json.loads(out)["verdict"] == "inconsistent"


def test_classify_inconclusive(capsys):
    code, _, _ = run(capsys, "classify", "--generator", HARMONIC, "--class", "GM", "--grid", "16,32")
    assert code == 4


@pytest.mark.parametrize("argv", [
    ["classify", "--generator", '{"params": {}}', "--class", "GM"],
    ["classify", "--class", "GM"],
    ["classify", "--generator", HARMONIC],
    ["classify", "--generator", HARMONIC, "--class", "GM", "--grid", "64,16"],
    ["norm", "--generator", HARMONIC, "--n", "4", "--tol", "0"],
    ["norm", "--generator", HARMONIC],
    ["study", "remark6", "--grid", "64,16"],
    ["study"],
    ["frobnicate"],
    ["classify", "--generator", HARMONIC, "--class", "GM", "--param", "oops"],
])
def test_config_errors_are_single_line(capsys, argv, tmp_path):
    code, _, err = run(capsys, *argv, "--out", str(tmp_path / "x")) if argv[0] in ("study",) else run(capsys, *argv)
    assert code == 2
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("error code=2 ")


def test_norm_sin3x(capsys):
    code, out, _ = run(capsys, "norm", "--generator", '{"name": "explicit", "params": {"values": [0, 0, 1]}}',
                       "--kind", "sin", "--functional", "partial_sum", "--n", "3")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(2 / math.pi, abs=1e-12)


def test_norm_vn_constant_term(capsys):
    code, out, _ = run(capsys, "norm", "--generator", '{"name": "constant", "params": {"value": 0, "a0": 1}}',
                       "--functional", "vn_sn_gap", "--n", "9")
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_norm_numeric_failure_exit_5(capsys):
    code, _, err = run(capsys, "norm", "--generator", '{"name": "constant", "params": {"value": 1}}',
                       "--functional", "sn_f_gap", "--n", "4")
    assert code == 5 and err.startswith("error code=5 ")


def test_norm_grid_then_plotdata(capsys, tmp_path):
    rep = tmp_path / "norms.json"
    code, _, _ = run(capsys, "norm", "--generator", HARMONIC, "--functional", "vn_sn_gap",
                     "--grid", "8:64:2", "--out", str(rep))
    assert code == 0
    code, out, _ = run(capsys, "plotdata", str(rep))
    rows = out.strip().splitlines()
    assert rows[0] == "n,value" and len(rows) == 5
    assert all(len(r.split(",")) == 2 for r in rows)


def test_config_file_and_param_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generator": {"name": "harmonic"}, "class": "GM", "grid": "16:256:2"}))
    code, out, _ = run(capsys, "classify", "--config", str(cfg), "--param", "grid=[8, 32, 128, 512, 2048, 8192]",
                       "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "m,variation,majorant,ratio" and len(out.splitlines()) == 7


def test_study_remark6_files(capsys, tmp_path):
    code, out, _ = run(capsys, "study", "remark6", "--out", str(tmp_path), "--grid", "16:4096:2", "--jobs", "2")
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert sum(n.endswith(".json") for n in names) == 1
    subs = {n.split("Z-", 1)[1] for n in names if n.endswith(".csv")}
    assert {"rbvs_b5.csv", "b6_series.csv", "gm_b6_2.csv"} <= subs
    report = next(p for p in tmp_path.iterdir() if p.suffix == ".json")
    code, out, _ = run(capsys, "plotdata", str(report), "--table", "gm_b6_2", "--x", "m", "--y", "ratio")
    assert code == 0 and out.splitlines()[0] == "m,ratio"


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "gmseries.cli", "classify", "--generator", HARMONIC,
                           "--class", "GM"], capture_output=True, text=True)
    assert proc.returncode == 0
