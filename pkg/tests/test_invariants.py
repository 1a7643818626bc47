import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bonnet4 import chart
from bonnet4.errors import NonIsothermalError, PreconditionError
from bonnet4.examples import make_example, make_stack
from bonnet4.immersion import RigidMotion, apply_rigid_motion
from bonnet4.invariants import (analyze, ellipse_frame, ellipse_frame_from_alpha, ellipse_semiaxes,
                                euler_numbers, ricci_like_residuals, superconformal_sign,
                                vertical_harmonicity_residual, winding_number)

from conftest import build


def test_sphere_of_radius_two():
    an = build("sphere", 32, 32, r=2.0)
    m = an.fd.grid.trusted()
    assert np.allclose(an.cd.K[m], 0.25) and np.allclose(an.cd.H2[m], 0.25)
    assert np.allclose(an.cd.K_N, 0) and np.allclose(an.hd.phi, 0, atol=1e-12)
    assert np.allclose(an.cd.lambda1[m], 0, atol=1e-7)


def test_product_torus_radii():
    an = build("product_torus", 32, a=1.0, b=2.0)
    assert np.allclose(an.cd.H2, (1 + 1 / 4) / 4)
    assert np.allclose(an.cd.lambda1, np.sqrt(1.25) / 2) and np.allclose(an.cd.lambda2, 0)
    assert np.allclose(an.cd.K, 0, atol=1e-12) and np.allclose(an.cd.K_N, 0, atol=1e-12)


def test_torus_in_s3_inside_s4():
    a = 0.6
    b = np.sqrt(1 - a * a)
    an = build("spherical_torus", 32, a=a)
    k1, k2 = b / a, -a / b  # principal curvatures inside the great S^3
    assert np.allclose(an.cd.H2, ((k1 + k2) / 2) ** 2)
    assert np.allclose(an.cd.K, 1 + k1 * k2, atol=1e-12)
    assert np.allclose(an.cd.lambda1, (k1 - k2) / 2)
    assert np.allclose(an.cd.K_N, 0, atol=1e-12)


def test_lawson_minimal_in_s3(lawson):
    fd, cd = lawson.fd, lawson.cd
    assert np.allclose(fd.H_amb, -lawson.imm.position, atol=1e-10)
    assert np.allclose(cd.K_N, 0, atol=1e-10)
    assert np.allclose(cd.lambda1**2, 1 - cd.K, atol=1e-9)
    assert np.allclose(cd.lambda2, 0, atol=1e-5)


def test_complex_curve_curvatures(zz2):
    U, V = zz2.fd.grid.mesh()
    r2 = U**2 + V**2
    K = -8 / (1 + 4 * r2) ** 3  # graph of w = g(z): -2|g''|^2 / (1 + |g'|^2)^3 with g = z^2
    assert np.allclose(zz2.cd.K, K, atol=1e-12)
    assert np.allclose(np.abs(zz2.cd.K_N), -K, atol=1e-12)
    assert np.allclose(zz2.cd.H2, 0, atol=1e-20)


def test_gauss_curvature_matches_intrinsic_laplacian():
    errs = []
    for n in (64, 128):
        an = build("lawson_torus", n)
        K_int = -chart.laplace_beltrami(np.log(an.fd.lam), an.fd.lam, an.fd.grid)
        errs.append(np.max(np.abs(K_int - an.cd.K)))
    assert errs[0] / errs[1] > 3.5


def test_invariants_under_rigid_motions(zz2):
    R = np.diag([1.0, 1, 1, -1])
    moved = analyze(apply_rigid_motion(zz2.imm, RigidMotion(R, np.ones(4))))
    assert np.allclose(moved.cd.K, zz2.cd.K) and np.allclose(moved.cd.H2, zz2.cd.H2, atol=1e-20)
    assert np.allclose(moved.cd.K_N, -zz2.cd.K_N)  # orientation-reversing


def test_semiaxes_two_ways(whitney):
    l1, l2 = ellipse_semiaxes(whitney.fd)
    assert np.allclose(l1, whitney.cd.lambda1, atol=1e-7)
    assert np.allclose(l2, whitney.cd.lambda2, atol=1e-7)


pair = arrays(float, 2, elements=st.floats(-5, 5))


@given(pair, pair, pair)
def test_ellipse_frame_from_alpha(a11, a12, a22):
    M = np.column_stack([(a11 - a22) / 2, a12])
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] - s[1] < 1e-6:
        with pytest.raises(PreconditionError):
            ellipse_frame_from_alpha(a11, a12, a22, tol=1e-6)
        return
    w, R, kappa, mu = ellipse_frame_from_alpha(a11, a12, a22)
    assert kappa == pytest.approx(s[0], abs=1e-9) and abs(mu) == pytest.approx(s[1], abs=1e-9)
    assert np.allclose(R.T @ R, np.eye(2)) and np.linalg.det(R) == pytest.approx(1)
    K_N = (a11 - a22) @ np.array([a12[1], -a12[0]])
    assert 2 * kappa * mu == pytest.approx(K_N, abs=1e-8)


def test_ellipse_frame_at_node(lawson):
    frame, kappa, mu = ellipse_frame(lawson.fd, (5, 7))
    assert frame.is_valid() and kappa == pytest.approx(lawson.cd.lambda1[7, 5])


def test_superconformal_sign(whitney, clifford, sphere):
    assert superconformal_sign(whitney.hd) == 1
    assert superconformal_sign(clifford.hd) == 0
    assert superconformal_sign(sphere.hd) == 0


def test_av_identity_on_whitney(whitney):
    fd, cd, hd = whitney.fd, whitney.cd, whitney.hd
    for s, psi in ((-1, hd.psi_minus), (1, hd.psi_plus)):
        rhs = fd.lam2**2 * cd.H2 * (cd.H2 - cd.K - s * cd.K_N)
        assert np.allclose(16 * np.abs(psi) ** 2 / fd.lam2**2, rhs / fd.lam2**2, atol=1e-9)


def test_minimal_complex_curve_is_vertically_harmonic():
    # both Hopf parts are holomorphic; the residual is a pure FD error
    res = [vertical_harmonicity_residual(an.hd, an.fd) for an in
           (build("complex_curve_zz2", 64), build("complex_curve_zz2", 127))]
    for s in (0, 1):
        assert res[0][s] / res[1][s] > 3.5 or res[1][s] < 1e-10


def test_clothoid_is_not_vertically_harmonic():
    an = build("clothoid_circle", 64)
    assert min(vertical_harmonicity_residual(an.hd, an.fd)) > 0.01


def test_ricci_residuals_on_clifford(clifford):
    ric = ricci_like_residuals(clifford.fd, clifford.cd, clifford.hd)
    assert max(ric.max_r3.values()) < 1e-9


@pytest.mark.parametrize("k", [1, 2, -1, 3])
def test_winding_number(k):
    t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    z = np.exp(1j * t)
    assert winding_number(z**k if k > 0 else np.conj(z) ** -k) == pytest.approx(k)


def test_euler_numbers_clifford(clifford):
    eu = euler_numbers([(clifford, np.ones(clifford.fd.grid.shape))])
    assert eu.chi == pytest.approx(0, abs=1e-9) and eu.chi_N == pytest.approx(0, abs=1e-9)
    assert eu.N_H2 == 0 and eu.covered


def test_euler_number_sphere_stack():
    stack = [(analyze(m), w) for m, w in make_stack("sphere", None, 64, 64)]
    eu = euler_numbers(stack)
    assert eu.chi == pytest.approx(2, abs=1e-3)


def test_open_chart_is_not_a_cover(zz2):
    eu = euler_numbers([(zz2, np.ones(zz2.fd.grid.shape))])
    assert not eu.covered


def test_analyze_checks_isothermality():
    imm = make_example("product_torus", None, 16, 16)
    bad = imm.with_position(imm.position * np.array([1, 1, 1.3, 1.3]))
    with pytest.raises(NonIsothermalError):
        analyze(bad)
    analyze(bad, check_isothermal=False)
