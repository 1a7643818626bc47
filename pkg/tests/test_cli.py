import json

import numpy as np
import pytest

from bonnet4.cli import main
from bonnet4.examples import make_example
from bonnet4.immersion import RigidMotion, apply_rigid_motion, load_grid, rotation_matrix, save_grid


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["make", "--example", "clifford", "--nu", "64", "--nv", "64", "--out", str(d / "c.json")]) == 0
    return d


def test_make_writes_loadable_file(work):
    imm = load_grid(work / "c.json")
    assert imm.name == "clifford_torus" and imm.grid.closed and imm.grid.nu == 64


def test_make_open_chart_and_obj(tmp_path):
    out = tmp_path / "w.json"
    assert main(["make", "--example", "whitney", "--nu", "32", "--nv", "16", "--out", str(out),
                 "--obj", str(tmp_path / "w.obj"), "--project", "xyw"]) == 0
    dom = json.loads(out.read_text())["domain"]
    assert dom["periodic_u"] and not dom["periodic_v"]
    assert (tmp_path / "w.obj").read_text().startswith("# whitney_sphere projected to xyw")


def test_make_parameter_error(tmp_path, capsys):
    assert main(["make", "--example", "sphere", "--r", "0", "--out", str(tmp_path / "s.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParameterError"


def test_make_unknown_example(tmp_path):
    assert main(["make", "--example", "klein", "--out", str(tmp_path / "k.json")]) == 2


def test_analyze_clifford(work, tmp_path):
    out, csv = tmp_path / "r.json", tmp_path / "f.csv"
    assert main(["analyze", str(work / "c.json"), "--out", str(out), "--fields", str(csv)]) == 0
    rep = json.loads(out.read_text())
    assert max(abs(x) for x in rep["K_range"]) < 1e-9
    assert all(abs(x - 1) < 1e-9 for x in rep["H_norm_range"])
    assert csv.read_text().startswith("iu,iv,u,v,lambda")


def test_analyze_whitney_uses_chart_stack(tmp_path):
    path = tmp_path / "w.json"
    main(["make", "--example", "whitney", "--nu", "64", "--nv", "64", "--out", str(path)])
    assert main(["analyze", str(path), "--out", str(tmp_path / "r.json")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["lagrangian"]["superconformal"] and rep["superconformal_sign"] == 1
    assert rep["euler"]["charts"] == 2 and abs(rep["euler"]["chi"] - 2) < 1e-2


def test_analyze_non_isothermal_file(tmp_path, capsys):
    imm = make_example("product_torus", None, 32, 32)
    save_grid(imm.with_position(imm.position * np.array([1, 1, 1.3, 1.3])), tmp_path / "bad.json")
    assert main(["analyze", str(tmp_path / "bad.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "NonIsothermalError" and len(err["node"]) == 2


def test_analyze_missing_file(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.json")]) == 2


def test_analyze_is_byte_stable(work, tmp_path):
    for name in ("a.json", "b.json"):
        main(["analyze", str(work / "c.json"), "--out", str(tmp_path / name)])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_deform_quarter_turn_certificate(work):
    assert main(["deform", str(work / "c.json"), "--theta", "1.570796", "--lift", "plus",
                 "--out", str(work / "q.json")]) == 0
    cert = json.loads((work / "q.cert.json").read_text())
    assert cert["all_green"] and cert["procrustes_rms_to_source"] > 0.05
    assert load_grid(work / "q.json").name == "deformed:clifford_torus"


def test_deform_zero_is_congruent(work, tmp_path):
    assert main(["deform", str(work / "c.json"), "--theta", "0", "--out", str(tmp_path / "z.json"),
                 "--cert", str(tmp_path / "z.cert")]) == 0
    assert json.loads((tmp_path / "z.cert").read_text())["procrustes_rms_to_source"] < 1e-5


def test_deform_two_refused_on_whitney(tmp_path, capsys):
    path = tmp_path / "w.json"
    main(["make", "--example", "whitney", "--nu", "64", "--nv", "32", "--out", str(path)])
    capsys.readouterr()
    assert main(["deform", str(path), "--two", "1.0", "2.0", "--out", str(tmp_path / "x.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "NotParallelError" and "residual" in err["message"]


def test_deform_needs_an_angle(work, tmp_path):
    assert main(["deform", str(work / "c.json"), "--out", str(tmp_path / "x.json")]) == 2


def test_compare_pairs(work, tmp_path):
    c = str(work / "c.json")
    main(["deform", c, "--theta", "1.570796", "--out", str(tmp_path / "p.json")])
    main(["deform", c, "--two", "1", "2", "--out", str(tmp_path / "t.json")])
    moved = apply_rigid_motion(load_grid(c), RigidMotion(rotation_matrix(4, 0, 2, 0.7), np.ones(4)))
    save_grid(moved, tmp_path / "m.json")
    tags = {}
    for name in ("p", "t", "m"):
        out = tmp_path / f"cmp_{name}.json"
        assert main(["compare", c, str(tmp_path / f"{name}.json"), "--out", str(out)]) == 0
        tags[name] = json.loads(out.read_text())
    assert tags["p"]["class_tag"] == "M_plus"
    assert tags["p"]["theta_plus"]["value"] == pytest.approx(1.570796, abs=1e-6)
    assert tags["t"]["class_tag"] == "M_star"
    assert tags["m"]["class_tag"] == "trivial"


def test_verify_single_case(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--case", "group", "--refine", "2", "--out", str(out)]) == 0
    assert "[PASS]  9 group" in capsys.readouterr().out
    assert json.loads(out.read_text())["passed"]


def test_verify_failure_exit_code(capsys):
    # an impossible convergence order makes the check fail
    assert main(["--tol", "min_order=5", "--tol", "exact_floor=0", "verify", "--case", "9", "--case", "lagrangian", "--refine", "2"]) == 1
    assert "[FAIL] 12 lagrangian" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["verify", "--case", "unknown"],
    ["verify", "--case", "group", "--refine", "1"],
    ["verify", "--all", "--case", "group"],
    ["--tol", "nonsense=1", "examples"],
    ["--tol", "isothermal", "examples"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_argparse_rejects_unknown_flags():
    with pytest.raises(SystemExit) as info:
        main(["make", "--example", "clifford", "--out", "x", "--bogus"])
    assert info.value.code == 2


def test_examples_listing(capsys):
    assert main(["examples"]) == 0
    assert "whitney_sphere" in capsys.readouterr().out
