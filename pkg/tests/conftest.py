import pytest

from bonnet4.examples import make_example
from bonnet4.invariants import analyze


def build(name, n=64, nv=None, **params):
    return analyze(make_example(name, params or None, n, nv or n))


@pytest.fixture(scope="session")
def clifford():
    return build("clifford_torus")


@pytest.fixture(scope="session")
def torus():
    return build("product_torus")


@pytest.fixture(scope="session")
def whitney():
    return build("whitney_sphere", 64, 64)


@pytest.fixture(scope="session")
def sphere():
    return build("sphere", 64, 64)


@pytest.fixture(scope="session")
def lawson():
    return build("lawson_torus")


@pytest.fixture(scope="session")
def zz2():
    return build("complex_curve_zz2")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
