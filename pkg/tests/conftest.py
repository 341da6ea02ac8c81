import math

import numpy as np
import pytest

from lipsphere import audit, generators, refine_surface

# criterion number -> (ok, detail), filled in by test_acceptance
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def _record(k, ok, detail=""):
        ok = bool(ok)
        if k in ACCEPTANCE:
            prev_ok, prev = ACCEPTANCE[k]
            ok, detail = ok and prev_ok, f"{prev}; {detail}"
        ACCEPTANCE[k] = (ok, detail)
        return ok

    return _record


@pytest.fixture(scope="session")
def suite():
    """Default audit suite at refine 1: list of (label, generated, surface)."""
    return audit.build_suite("default", refine=1, seed=7)


@pytest.fixture(scope="session")
def torus6():
    return generators.flat_torus(1.0, 1.0, 6)


@pytest.fixture(scope="session")
def torus16():
    return generators.flat_torus(1.0, 1.0, 16)


@pytest.fixture(scope="session")
def ico2():
    return generators.icosphere(2, 1.0)


@pytest.fixture(scope="session")
def ico2r1(ico2):
    return refine_surface(ico2, 1)


@pytest.fixture(scope="session")
def genus2():
    return generators.genus_g(2, 0.3, 12)


def great_circle(P, i, j, r=1.0):
    a, b = P[i], P[j]
    return r * math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))
