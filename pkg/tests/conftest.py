import numpy as np
import pytest

from elastoscatter import Material, PlaneWave, Sphere
from elastoscatter.solver import DIRICHLET, solve_exterior


@pytest.fixture(scope="session")
def mat():
    return Material(2.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def wave():
    return PlaneWave((0.0, 0.0, 1.0), (1.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def rigid_sphere(mat, wave):
    """Default rigid unit-sphere solve shared by the slower tests."""
    return solve_exterior(Sphere(), DIRICHLET, wave, mat)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    """Record ``(passed, detail)`` for an acceptance criterion number."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        passed, detail = log[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")
