import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from lipsphere import cli


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("lipsphere").joinpath("schema/report.schema.json").read_text())


def _run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def meshes(tmp_path_factory):
    d = tmp_path_factory.mktemp("meshes")
    paths = {}
    for name, argv in {
        "sphere": ["icosphere", "--subdiv", "2"],
        "torus": ["flat_torus", "--n", "8"],
        "genus2": ["genus_g", "--G", "2", "--handle-scale", "0.3", "--n", "12"],
    }.items():
        out = d / f"{name}.off"
        assert cli.run(["gen", *argv, "-o", str(out)]) == 0
        paths[name] = out
    return paths


def test_gen_writes_sidecar(tmp_path, capsys, schema):
    code, out, _ = _run(capsys, "gen", "ellipsoid", "--axes", 1, 1, 0.5, "--n", 2, "-o", tmp_path / "e.obj")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    side = json.loads((tmp_path / "e.json").read_text())
    assert side["kind"] == "ellipsoid" and side["params"]["axes"] == [1.0, 1.0, 0.5]
    assert side["reference"]["genus"] == 0
    assert (tmp_path / "e.obj").read_text().startswith(("v ", "#"))


def test_gen_branched_cover(tmp_path, capsys):
    code, out, _ = _run(capsys, "gen", "branched_cover", "--epsilon", 0.4, "--seed", 1, "-o", tmp_path / "c.off")
    assert code == 0
    side = json.loads((tmp_path / "c.json").read_text())
    assert side["reference"]["degree"] == 2
    assert (tmp_path / side["base"]).exists()


@pytest.mark.parametrize("argv", [
    ["analyze", "{sphere}", "--refine", "0", "--basepoint", "0"],
    ["map", "{sphere}", "--refine", "0", "--basepoint", "0"],
    ["systole", "{genus2}", "--refine", "0", "--planarity"],
    ["width", "{torus}", "--refine", "0", "--basepoint", "0"],
    ["sweepout", "{sphere}", "--refine", "0", "--basepoint", "0", "--levels", "4", "--extra-basepoints", "0"],
])
def test_reports_validate(argv, meshes, capsys, schema):
    argv = [a.format(**meshes) for a in argv]
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    assert rep["command"] == argv[0]
    assert rep["mesh"]["vertices"] > 0 and rep["refine"] == 0


def test_map_result_fields(meshes, capsys, tmp_path):
    code, out, _ = _run(capsys, "map", meshes["sphere"], "--refine", 0, "--basepoint", 0, "-o", tmp_path / "m.obj")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["certificate"]["degree"] == 1
    hs = res["hypersphericity"]
    assert hs["lower"] <= 1.0 <= hs["upper"]
    assert (tmp_path / "m.obj").exists()


def test_systole_result(meshes, capsys):
    code, out, _ = _run(capsys, "systole", meshes["torus"], "--refine", 0)
    assert code == 0
    assert abs(json.loads(out)["result"]["systole"]["length"] - 1.0) <= 1e-9


def test_width_dot(meshes, capsys, tmp_path):
    code, _, _ = _run(capsys, "width", meshes["sphere"], "--refine", 0, "--basepoint", 0, "--dot", tmp_path / "r.dot")
    assert code == 0
    assert (tmp_path / "r.dot").read_text().startswith("graph reeb {")


def test_reports_are_byte_identical(meshes, capsys):
    argv = ["analyze", meshes["genus2"], "--refine", 0]
    a = _run(capsys, *argv)
    b = _run(capsys, *argv)
    assert a[0] == 0 and a[1] == b[1]


def test_missing_mesh_exit_3(capsys, tmp_path):
    code, out, err = _run(capsys, "analyze", tmp_path / "nope.off")
    assert code == 3 and out == ""
    e = json.loads(err)
    assert e["exit"] == 3 and e["error"] == "mesh"


def test_bad_mesh_exit_3(capsys, tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
    code, _, err = _run(capsys, "analyze", p)
    assert code == 3 and json.loads(err)["error"] == "mesh_parse"


def test_open_mesh_exit_3(capsys, tmp_path):
    p = tmp_path / "tri.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    code, _, err = _run(capsys, "analyze", p)
    assert code == 3 and json.loads(err)["error"] == "topology"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["analyze"], ["analyze", "x.off", "--refine", "-1"]])
def test_usage_exit_2(argv, capsys):
    code, out, err = _run(capsys, *argv)
    assert code == 2 and out == ""
    assert json.loads(err)["exit"] == 2


def test_map_on_torus_is_invalid(meshes, capsys):
    code, _, err = _run(capsys, "map", meshes["torus"], "--refine", 0)
    assert code == 2 and json.loads(err)["error"] == "invalid"


def test_audit_quick_entry_point(schema):
    p = subprocess.run([sys.executable, "-m", "lipsphere.cli", "audit", "--suite", "quick", "--refine", "0"],
                       capture_output=True, text=True, timeout=600)
    assert p.returncode == 0, p.stderr
    rep = json.loads(p.stdout)
    jsonschema.validate(rep, schema)
    assert rep["result"]["violations"] == 0 and rep["result"]["checks"]
