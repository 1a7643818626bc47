import numpy as np
import pytest

from bonnet4.errors import UnsupportedAmbientError
from bonnet4.gaussmap import (RADIUS, eigenfunction_residual, gauss_map, gauss_map_from_mean_curvature,
                              great_circle_distance, is_constant, jacobians)

from conftest import build


def test_components_lie_on_spheres_of_radius_rho(whitney):
    gm = gauss_map(whitney.fd)
    assert np.allclose(np.linalg.norm(gm.x_plus, axis=-1), RADIUS)
    assert np.allclose(np.linalg.norm(gm.x_minus, axis=-1), RADIUS)


def test_round_sphere_jacobians_are_one_half(sphere):
    jp, jm, rk, rkn = jacobians(gauss_map(sphere.fd), sphere.fd, sphere.cd)
    m = sphere.fd.grid.trusted()
    assert np.allclose(jp[m], 0.5, atol=5e-3) and np.allclose(jm[m], 0.5, atol=5e-3)
    assert rk < 5e-3 and rkn < 1e-12


def test_jacobian_identities_converge(lawson):
    errs = []
    for n in (64, 128):
        an = build("lawson_torus", n)
        _, _, rk, rkn = jacobians(gauss_map(an.fd), an.fd, an.cd)
        errs.append((rk, rkn))
    assert errs[0][0] / errs[1][0] > 3.5 and errs[0][1] / errs[1][1] > 3.5


def test_mean_curvature_formula_matches_plucker_image(clifford, lawson):
    for an in (clifford, lawson):
        gm = gauss_map(an.fd)
        gp, gmn = gauss_map_from_mean_curvature(an.fd)
        assert np.allclose(gp, gm.g_plus, atol=1e-10) and np.allclose(gmn, gm.g_minus, atol=1e-10)


def test_product_torus_g_minus_on_great_circle(torus):
    gm = gauss_map(torus.fd)
    assert great_circle_distance(gm.x_minus) < 1e-9
    assert great_circle_distance(gm.x_plus) < 1e-9


def test_complex_curve_has_constant_component(zz2):
    gm = gauss_map(zz2.fd)
    assert is_constant(gm.x_plus) != is_constant(gm.x_minus)


def test_eigenfunction_residual_converges_on_clifford():
    r = [eigenfunction_residual(gauss_map(an.fd), an.fd, an.cd, -1)
         for an in (build("clifford_torus", 64), build("clifford_torus", 128))]
    assert r[0] / r[1] == pytest.approx(4, rel=0.05)


def test_gauss_map_needs_flat_ambient():
    an = build("spherical_torus", 16)
    with pytest.raises(UnsupportedAmbientError):
        gauss_map(an.fd)
