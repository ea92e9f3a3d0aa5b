from __future__ import annotations

import csv
import io
import json

import pytest

from cptyper.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_generate_hexagonal(capsys, tmp_path):
    out_file = tmp_path / "hex.json"
    code, _, _ = run(capsys, "generate", "--gen", "hexagonal", "--radius", "10", "--out", str(out_file))
    assert code == 0
    data = json.loads(out_file.read_text())
    assert len(data["rotation"]) == 3 * 100 + 30 + 1


def test_profile_csv_and_json(capsys):
    code, out, _ = run(capsys, "profile", "--gen", "hexagonal", "--radius", "8")
    assert code == 0
    rows = csv_rows(out)
    assert [int(r["dB"]) for r in rows] == [12 * n + 6 for n in range(8)]
    assert rows[2]["m"] == "1"
    code, out, _ = run(capsys, "profile", "--spec", "mixed", "--radius", "6", "--format", "json",
                       "--main-bodies", "2")
    assert code == 0
    data = json.loads(out)
    assert data["profile"][4]["m"] is None
    assert data["profile"][1]["S"] == 3
    assert len(data["series"]) == 4


def test_gauss_bonnet_command(capsys):
    code, out, _ = run(capsys, "gauss-bonnet", "--spec", "rm1", "--radius", "5", "--samples", "5")
    assert code == 0
    rows = csv_rows(out)
    assert {r["residual1"] for r in rows} == {"0/1"}
    assert len(rows) == 2 * 5 + 5


def test_vel_on_tiling_mesh_and_comparison(capsys):
    spec = json.dumps({"shape": "rectangle", "counts": [1, 2, 3]})
    code, out, _ = run(capsys, "vel", "--gen", "tiling", "--spec", spec, "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["exact"] == "11/6"
    assert data["error"] < 1e-5
    code, out, _ = run(capsys, "vel", "--gen", "mesh", "--spec", '{"size": 3}', "--format", "json")
    assert json.loads(out)["exact"] == "25/12"
    layered_spec = json.dumps({"kind": "layered", "k0": 0, "h": [2, 2, 2], "d": [1, 1, 1]})
    code, out, err = run(capsys, "vel", "--gen", "comparison", "--spec", layered_spec, "--nmax", "1")
    assert code == 0
    assert out.startswith("vertex,mu")
    assert json.loads(err)["error"] < 1e-4


def test_vel_cap_exits_3(capsys):
    code, _, err = run(capsys, "vel", "--gen", "mesh", "--spec", '{"size": 5}', "--cap", "1")
    assert code == 3
    assert "budget" in err


def test_flow_on_mixed(capsys):
    code, out, _ = run(capsys, "flow", "--spec", "mixed", "--radius", "6")
    assert code == 0
    rows = csv_rows(out)
    assert rows[0]["level_energy"] == "1/3"
    assert all(float(r["truncated_float"]) <= float(r["bound"]) for r in rows)
    code, out, _ = run(capsys, "flow", "--spec", "mixed", "--radius", "4", "--format", "json")
    assert code == 0
    assert json.loads(out)["edges"]


@pytest.mark.parametrize("kind,extra,expected", [
    ("partition", [], True),
    ("ball-degree", ["-K", "1"], True),
    ("perimetric", ["--cap", "9"], True),
])
def test_certify_kinds(capsys, kind, extra, expected):
    code, out, _ = run(capsys, "certify", "--spec", "seven-regular", "--gen", "layered", "--radius", "4",
                       "--kind", kind, *extra)
    assert code == 0
    assert json.loads(out)["passed"] is expected


def test_certify_fails_on_hexagonal(capsys):
    code, out, _ = run(capsys, "certify", "--gen", "hexagonal", "--radius", "4", "--kind", "partition")
    # a failed certificate is still a successful run
    assert code == 0
    assert json.loads(out)["passed"] is False


def test_layered_table(capsys):
    spec = json.dumps({"kind": "layered", "k0": 0, "h": [2, 2], "d": [1, 1]})
    code, out, _ = run(capsys, "layered", "--spec", spec, "--nmax", "2", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["c"] for r in rows] == [2, 8]
    assert rows[1]["vel"] == "32/27"


@pytest.mark.parametrize("argv", [
    ["profile", "--gen", "layered", "--radius", "3"],
    ["profile", "--spec", "not json {", "--radius", "3"],
    ["generate", "--gen", "penrose", "--spec", "{}", "--radius", "3"],
    ["generate", "--gen", "hexagonal", "--radius", "0"],
    ["profile", "--gen", "hexagonal", "--radius", "4", "--nmax", "9"],
    ["vel", "--gen", "hexagonal", "--radius", "3", "--tolerance", "-1"],
])
def test_bad_input_exits_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error")
