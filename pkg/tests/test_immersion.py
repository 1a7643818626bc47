import json

import numpy as np
import pytest

from bonnet4.chart import ChartGrid
from bonnet4.errors import GridFormatError, ImmersionDegeneracyError, NonIsothermalError, ParameterError
from bonnet4.examples import make_example, reattach_provider
from bonnet4.immersion import (ImmersionGrid, RigidMotion, apply_rigid_motion, export_obj, jets, load_grid,
                               rotation_matrix, save_grid, validate_isothermal)


@pytest.fixture(scope="module")
def cliff():
    return make_example("clifford_torus", None, 32, 32)


def test_round_trip(tmp_path, cliff):
    path = tmp_path / "c.json"
    save_grid(cliff, path)
    back = load_grid(path)
    assert back.grid == cliff.grid and back.c == cliff.c
    assert np.array_equal(back.position, cliff.position)
    assert back.name == "clifford_torus" and back.provider is None
    assert reattach_provider(back).provider is not None


def test_round_trip_with_sampled_derivatives(tmp_path, cliff):
    j = jets(cliff)
    imm = cliff.with_position(cliff.position, d1=np.stack([j.fu, j.fv], axis=2),
                              d2=np.stack([j.fuu, j.fuv, j.fvv], axis=2), name="")
    save_grid(imm, tmp_path / "d.json")
    back = load_grid(tmp_path / "d.json")
    assert np.array_equal(back.d1, imm.d1) and np.array_equal(back.d2, imm.d2)
    js = jets(back)
    assert js.source == "sampled" and np.allclose(js.fu, j.fu)


def test_modified_grid_keeps_fd_jets(tmp_path, cliff):
    imm = cliff.with_position(cliff.position + 1e-3)
    assert reattach_provider(imm).provider is None


def _doc(tmp_path, **changes):
    doc = {"version": 1, "c": 0.0, "ambient_dim": 4,
           "domain": {"u0": 0, "u1": 1, "v0": 0, "v1": 1, "nu": 8, "nv": 8,
                      "periodic_u": False, "periodic_v": False},
           "position": [[i, j, 0.0, 0.0] for j in range(8) for i in range(8)]}
    doc.update(changes)
    p = tmp_path / "g.json"
    p.write_text(json.dumps(doc))
    return p


def test_loader_accepts_minimal_document(tmp_path):
    assert load_grid(_doc(tmp_path)).grid.nu == 8


@pytest.mark.parametrize("changes,needle", [
    ({"version": 7}, "version"),
    ({"position": [[0.0, 0, 0, 0]] * 10}, "has 10 entries"),
    ({"position": [[0.0, 0, 0]] * 64}, "shape"),
    ({"domain": {"u0": 0}}, "missing"),
])
def test_loader_rejects_bad_documents(tmp_path, changes, needle):
    with pytest.raises(GridFormatError, match=needle):
        load_grid(_doc(tmp_path, **changes))


def test_loader_rejects_non_finite_and_non_json(tmp_path):
    pos = [[i, j, 0.0, 0.0] for j in range(8) for i in range(8)]
    pos[9][2] = float("nan")
    p = _doc(tmp_path, position=pos)
    p.write_text(p.read_text().replace("NaN", "NaN"))
    with pytest.raises(GridFormatError, match="node 9"):
        load_grid(p)
    p.write_text("{not json")
    with pytest.raises(GridFormatError):
        load_grid(p)


def test_constructor_checks():
    g = ChartGrid(0, 1, 0, 1, 8, 8)
    with pytest.raises(GridFormatError):
        ImmersionGrid(g, np.zeros((8, 8, 3)))
    with pytest.raises(GridFormatError):
        ImmersionGrid(g, np.zeros((8, 8, 4)), c=1.0)
    with pytest.raises(GridFormatError, match="off the sphere"):
        ImmersionGrid(g, np.ones((8, 8, 5)), c=1.0)


def test_degenerate_immersion_is_rejected():
    g = ChartGrid(0, 1, 0, 1, 8, 8)
    U, _ = g.mesh()
    pos = np.zeros((8, 8, 4))
    pos[..., 0] = U
    with pytest.raises(ImmersionDegeneracyError) as info:
        jets(ImmersionGrid(g, pos))
    assert info.value.node is not None


def test_non_isothermal_chart_is_rejected():
    g = ChartGrid(0, 1, 0, 1, 8, 8)
    U, V = g.mesh()
    pos = np.stack([U, 2 * V, 0 * U, 0 * U], axis=-1)
    with pytest.raises(NonIsothermalError):
        validate_isothermal(ImmersionGrid(g, pos))


def test_fd_jets_converge_to_analytic():
    errs = []
    for n in (32, 64, 128):
        imm = make_example("clifford_torus", None, n, n)
        a, f = jets(imm), jets(imm, "fd")
        assert a.source == "analytic" and f.source == "fd"
        errs.append(max(np.max(np.abs(a.fuu - f.fuu)), np.max(np.abs(a.fuuv - f.fuuv))))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_jets_mode_validation(cliff):
    with pytest.raises(ValueError):
        jets(cliff, "magic")


def test_rigid_motion():
    R = rotation_matrix(4, 0, 3, 0.4) @ rotation_matrix(4, 1, 2, -1.1)
    m = RigidMotion(R, np.arange(4.0))
    inv = RigidMotion(R.T, -R.T @ np.arange(4.0))
    x = np.random.default_rng(1).normal(size=(5, 4))
    assert np.allclose(m.compose(inv).apply(x), x)
    assert m.det == 1 and RigidMotion(np.diag([1.0, 1, 1, -1]), np.zeros(4)).det == -1
    with pytest.raises(ParameterError):
        RigidMotion(2 * np.eye(4), np.zeros(4))


def test_apply_rigid_motion_moves_analytic_jets(cliff):
    m = RigidMotion(rotation_matrix(4, 0, 2, 0.3), np.ones(4))
    moved = apply_rigid_motion(cliff, m)
    j0, j1 = jets(cliff), jets(moved)
    assert np.allclose(j1.fu, j0.fu @ m.A.T) and np.allclose(j1.f, m.apply(j0.f))
    with pytest.raises(ParameterError):
        apply_rigid_motion(cliff, RigidMotion.identity(5))


def test_sphere_motion_forbids_translation():
    st = make_example("spherical_torus", None, 16, 16)
    with pytest.raises(ParameterError):
        apply_rigid_motion(st, RigidMotion(np.eye(5), np.ones(5)))


def test_export_obj(tmp_path, cliff):
    path = tmp_path / "c.obj"
    export_obj(cliff, path, "xzw")
    lines = path.read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 32 * 32
    assert sum(l.startswith("f ") for l in lines) == 32 * 32  # closed torus
    with pytest.raises(ParameterError):
        export_obj(cliff, path, "abc")


def test_export_obj_open_grid(tmp_path):
    imm = make_example("complex_curve_zz2", None, 9, 9)
    export_obj(imm, tmp_path / "z.obj")
    assert sum(l.startswith("f ") for l in (tmp_path / "z.obj").read_text().splitlines()) == 64
