import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bonnet4.config import DEFAULT
from bonnet4.errors import (DegenerateFrameError, IntegrationInconsistencyError, NotParallelError,
                            ParameterError, UnsupportedAmbientError)
from bonnet4.deform import (connection_matrices, deform_data, deform_data_two, fit_hypersphere, gcr_residuals,
                            max_abs_difference, procrustes_align, reconstruct, source_data, with_seed)
from bonnet4.immersion import RigidMotion, apply_rigid_motion, rotation_matrix

from conftest import build

angle = st.floats(-20, 20, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(angle, angle, st.sampled_from([1, -1]))
def test_composition_adds_angles(clifford, t1, t2, s):
    fd, hd = clifford.fd, clifford.hd
    two_step = deform_data(deform_data(fd, hd, t1, s), theta=t2, lift_sign=s)
    one_step = deform_data(fd, hd, t1 + t2, s)
    assert max_abs_difference(two_step, one_step) < 1e-12


def test_full_turn_is_identity(whitney):
    for s in (1, -1):
        d = deform_data(whitney.fd, whitney.hd, 2 * np.pi, s)
        assert max_abs_difference(d, source_data(whitney.fd, whitney.hd)) < 1e-12
        assert d.theta == 0


def test_deformation_keeps_mean_curvature_and_moves_one_part(lawson):
    fd, hd = lawson.fd, lawson.hd
    d = deform_data(fd, hd, 1.3, 1)
    assert np.array_equal(d.h, fd.h)
    assert np.allclose((d.beta11 + d.beta22) / 2, fd.h)
    assert np.array_equal(d.phi_minus, hd.phi_minus)
    assert np.allclose(d.phi_plus, hd.phi_plus * np.exp(-1.3j))
    d = deform_data(fd, hd, 1.3, -1)
    assert np.allclose(d.phi_minus, hd.phi_minus * np.exp(1.3j))
    assert np.array_equal(d.phi_plus, hd.phi_plus)


def test_bad_lift_sign(clifford):
    with pytest.raises(ParameterError):
        deform_data(clifford.fd, clifford.hd, 1.0, 0)


def test_deformed_data_satisfy_structure_equations():
    an = build("lawson_torus", 64)
    src = gcr_residuals(source_data(an.fd, an.hd))
    for s in (1, -1):
        res = gcr_residuals(deform_data(an.fd, an.hd, 2.0, s))
        # the deformation does not make the residuals worse than discretization of the source
        assert res.worst < 2 * src.worst + 1e-12


def test_gcr_residuals_detect_broken_data(whitney):
    d = deform_data(whitney.fd, whitney.hd, 0.5, 1)
    broken = dataclasses.replace(d, beta12=1.1 * d.beta12)
    res, ok = gcr_residuals(broken), gcr_residuals(d)
    # valid data carry only FD truncation error; the corruption sits well above it
    assert max(res.max_codazzi, res.max_ricci) > 10 * ok.worst


def test_path_dependence_beyond_gcr_scale_is_an_error(clifford):
    d = deform_data(clifford.fd, clifford.hd, 0.5, 1)
    broken = dataclasses.replace(d, beta11=1.3 * d.beta11)
    reconstruct(broken)  # inconsistency explained by the GCR residuals
    with pytest.raises(IntegrationInconsistencyError):
        reconstruct(broken, tol=DEFAULT.override(path_factor=1e-6, path_floor=0.0))


def test_two_parameter_refused_without_parallel_h(whitney):
    with pytest.raises(NotParallelError, match="residual"):
        deform_data_two(whitney.fd, whitney.hd, 1.0, 2.0)


def test_two_parameter_angles(clifford):
    d = deform_data_two(clifford.fd, clifford.hd, 1.0, 2.0)
    assert d.mode == "two-parameter" and d.angles == (1.0, 2.0)
    assert np.allclose(d.phi_minus, clifford.hd.phi_minus * np.exp(1j))
    assert np.allclose(d.phi_plus, clifford.hd.phi_plus * np.exp(-2j))


def test_connection_matrices_are_skew(whitney):
    Au, Av = connection_matrices(source_data(whitney.fd, whitney.hd))
    assert np.allclose(Au, -np.swapaxes(Au, -1, -2)) and np.allclose(Av, -np.swapaxes(Av, -1, -2))


def test_round_trip_at_theta_zero():
    an = build("clifford_torus", 64)
    rec = reconstruct(deform_data(an.fd, an.hd, 0.0, 1, position=an.imm.position))
    _, rms = procrustes_align(rec.surface, an.imm)
    assert rms < 5e-6
    assert rec.surface.grid.closed and rec.orthogonality < 1e-12


def test_seed_moves_result_rigidly(clifford):
    d = deform_data(clifford.fd, clifford.hd, 0.7, 1)
    base = reconstruct(with_seed(d, np.eye(4), np.zeros(4)))
    R = rotation_matrix(4, 1, 3, 0.9)
    moved = reconstruct(with_seed(d, R, np.ones(4)))
    assert np.allclose(moved.surface.position, RigidMotion(R, np.ones(4)).apply(base.surface.position),
                       atol=1e-12)


def test_bad_seed_frame(clifford):
    d = source_data(clifford.fd, clifford.hd)
    with pytest.raises(DegenerateFrameError):
        reconstruct(d, seed_frame=np.diag([1.0, 1, 1, -1]))


def test_reconstruction_needs_flat_ambient():
    an = build("spherical_torus", 16)
    with pytest.raises(UnsupportedAmbientError):
        reconstruct(source_data(an.fd, an.hd))


def test_quarter_turn_opens_seams_and_keeps_metric():
    an = build("clifford_torus", 64)
    rec = reconstruct(deform_data(an.fd, an.hd, np.pi / 2, 1))
    g = rec.surface.grid
    assert not g.periodic_u and not g.periodic_v
    assert g.hu == pytest.approx(an.fd.grid.hu)
    assert rec.metric_residual < 1e-2 and rec.path_independence < 1e-10
    _, rms = procrustes_align(rec.surface.position, an.imm.position)
    assert rms > 0.05


def test_product_torus_two_parameter_on_hypersphere():
    an = build("product_torus", 64)
    rec = reconstruct(deform_data_two(an.fd, an.hd, 1.0, 2 * np.pi - 1.0))
    _, radius, dev = fit_hypersphere(rec.surface.position)
    assert radius == pytest.approx(np.sqrt(2), rel=1e-4) and dev < 1e-4


def test_procrustes_recovers_motion(clifford):
    m = RigidMotion(rotation_matrix(4, 0, 1, 0.4) @ rotation_matrix(4, 2, 3, -2.0), np.arange(4.0))
    moved = apply_rigid_motion(clifford.imm, m)
    found, rms = procrustes_align(clifford.imm, moved)
    assert rms < 1e-12 and np.allclose(found.A, m.A) and np.allclose(found.t, m.t)


def test_procrustes_errors():
    with pytest.raises(ParameterError):
        procrustes_align(np.zeros((3, 4)), np.zeros((4, 4)))
    line = np.outer(np.arange(5.0), np.array([1.0, 0, 0, 0]))
    with pytest.raises(DegenerateFrameError):
        procrustes_align(line, line)


def test_fit_hypersphere():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(50, 4))
    x = 3 * x / np.linalg.norm(x, axis=1, keepdims=True) + np.array([1.0, 2, 3, 4])
    c, r, dev = fit_hypersphere(x)
    assert np.allclose(c, [1, 2, 3, 4]) and r == pytest.approx(3) and dev < 1e-12
