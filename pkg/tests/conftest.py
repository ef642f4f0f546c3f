import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from causalpaths import morse  # noqa: E402
from causalpaths.surfaces import Surface  # noqa: E402

P_ELL = np.array([1.0, 0.0, 0.0])
Q_ELL = np.array([0.0, 1.0, 0.0])


@pytest.fixture(scope="session")
def ellipsoid():
    return Surface.ellipsoid(1, 1, 2)


@pytest.fixture(scope="session")
def sphere():
    return Surface.sphere(1)


@pytest.fixture(scope="session")
def torus():
    return Surface.flat_torus(2 * math.pi)


@pytest.fixture(scope="session")
def ellipsoid_census(ellipsoid):
    return morse.build_census(ellipsoid, P_ELL, Q_ELL, 6.0)


@pytest.fixture(scope="session")
def sphere_census(sphere):
    return morse.build_census(sphere, P_ELL, Q_ELL, 5.0)


@pytest.fixture(scope="session")
def torus_census(torus):
    return morse.build_census(torus, [0.0, 0.0], [math.pi, 0.0], 8.0)


@pytest.fixture(scope="session")
def ell3(ellipsoid_census):
    (m,) = ellipsoid_census.merges()
    return m.length


# one line per acceptance criterion, printed after the test run
_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE[n] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
