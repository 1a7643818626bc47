import numpy as np
import pytest

from bonnet4.chart import surface_integral
from bonnet4.errors import NonIsothermalError, ParameterError
from bonnet4.examples import CATALOG, canonical_name, catalog_text, make_example, make_stack
from bonnet4.immersion import jets


def test_aliases_and_catalog():
    assert canonical_name("clifford") == "clifford_torus"
    assert canonical_name("whitney") == "whitney_sphere"
    with pytest.raises(ParameterError):
        canonical_name("klein_bottle")
    text = catalog_text()
    assert all(name in text for name in CATALOG)


@pytest.mark.parametrize("name,params", [
    ("sphere", {"r": 0}),
    ("product_torus", {"a": -1}),
    ("sphere", {"radius": 1}),
    ("spherical_torus", {"a": 1.5}),
    ("lawson_torus", {"m": 1, "k": 2}),
    ("sphere", {"r": "abc"}),
])
def test_bad_parameters(name, params):
    with pytest.raises(ParameterError):
        make_example(name, params, 16, 16)


def test_chart_b_only_for_spheres():
    with pytest.raises(ParameterError):
        make_example("clifford_torus", None, 16, 16, chart="B")
    with pytest.raises(ParameterError):
        make_example("sphere", None, 16, 16, chart="C")


def test_domain_flags():
    w = make_example("whitney", None, 32, 16)
    assert w.grid.periodic_u and not w.grid.periodic_v
    c = make_example("clothoid", None, 16, 16)
    assert not c.grid.periodic_u and c.grid.periodic_v
    assert make_example("clifford", None, 16, 16).grid.closed


def test_graph_example_must_be_isothermal():
    make_example("graph", {"h1": "u**3 - 3*u*v**2", "h2": "3*u**2*v - v**3"}, 16, 16)
    with pytest.raises(NonIsothermalError):
        make_example("graph", {"h1": "u**2", "h2": "v"}, 16, 16)


def test_sphere_radius_and_spherical_torus_on_s4():
    s = make_example("sphere", {"r": 2.0}, 16, 16)
    assert np.allclose(np.linalg.norm(s.position, axis=-1), 2.0)
    t = make_example("spherical_torus", None, 16, 16)
    assert t.c == 1 and t.ambient_dim == 5
    assert np.allclose(np.linalg.norm(t.position, axis=-1), 1.0)


def test_lawson_lies_on_unit_sphere():
    L = make_example("lawson", None, 32, 32)
    assert np.allclose(np.linalg.norm(L.position, axis=-1), 1.0)


def test_chart_stack_partition_of_unity():
    stack = make_stack("sphere", None, 128, 128)
    area = 0.0
    for imm, w in stack:
        assert w.min() >= 0 and w.max() <= 1
        lam = np.linalg.norm(jets(imm).fu, axis=-1)
        area += surface_integral(np.ones(imm.grid.shape), lam, imm.grid, weight=w)
    assert area == pytest.approx(4 * np.pi, rel=1e-5)  # trapezoid error at 128^2


def test_stack_of_torus_and_refusals():
    [(imm, w)] = make_stack("clifford", None, 16, 16)
    assert np.all(w == 1)
    with pytest.raises(ParameterError):
        make_stack("clothoid", None, 16, 16)
    with pytest.raises(ParameterError):
        make_stack("sphere", {"vmax": 1.0}, 16, 16)
