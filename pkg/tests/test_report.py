import json
import math

import numpy as np

from bonnet4.errors import NonIsothermalError
from bonnet4.examples import make_stack
from bonnet4.invariants import analyze
from bonnet4.report import clean, dumps, error_dict, export_fields, surface_report


def test_clean_converts_and_rounds():
    out = clean({"a": np.float64(1 / 3), "b": np.arange(2), "c": (np.bool_(True), math.nan, -0.0),
                 3: np.int64(4)})
    assert out == {"a": 0.333333333333, "b": [0, 1], "c": [True, None, 0.0], "3": 4}


def test_dumps_is_sorted_and_stable():
    text = dumps({"b": 1.0 + 1e-15, "a": [1, 2]})
    assert text == dumps({"a": [1, 2], "b": 1.0})
    assert list(json.loads(text)) == ["a", "b"] and text.endswith("\n")


def test_error_dict_keeps_node():
    d = error_dict(NonIsothermalError("bad", node=(3, 4)))
    assert d == {"error": "NonIsothermalError", "message": "bad", "node": [3, 4]}


def test_clifford_report(clifford):
    rep = clean(surface_report(clifford))
    assert rep["name"] == "clifford_torus" and rep["jet_source"] == "analytic"
    assert abs(rep["K_range"][0]) < 1e-12 and abs(rep["H_norm_range"][1] - 1) < 1e-12
    assert rep["euler"]["chi"] == 0 or abs(rep["euler"]["chi"]) < 1e-12
    assert "gauss_map" in rep and "lagrangian" in rep


def test_whitney_report_with_stack(whitney):
    stack = [(analyze(m), w) for m, w in make_stack("whitney_sphere", None, 64, 64)]
    rep = clean(surface_report(whitney, stack=stack))
    assert rep["superconformal_sign"] == 1 and rep["lagrangian"]["superconformal"]
    assert abs(rep["euler"]["chi"] - 2) < 1e-2 and rep["euler"]["N_H2"] == 4
    assert rep["residuals"]["R4"]["+"] == "not applicable"


def test_report_on_sphere_in_s4_has_no_gauss_map():
    from conftest import build
    rep = surface_report(build("spherical_torus", 32))
    assert "gauss_map" not in rep and rep["c"] == 1


def test_export_fields(tmp_path, clifford):
    export_fields(clifford, tmp_path / "f.csv")
    header = (tmp_path / "f.csv").read_text().splitlines()[0].split(",")
    for col in ("lambda", "K", "K_N", "phi_minus_re", "g_plus_5"):
        assert col in header
