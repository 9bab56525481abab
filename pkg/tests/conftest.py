import numpy as np
import pytest

from noisy_sysid.system import LinearSystem, controllability_matrix
from noisy_sysid.numerics import min_singular_value


def scalar_system(a=0.5, b=1.0, sw=1.0, su=1.0, se=1.0, autonomous=False):
    one = np.ones((1, 1))
    if autonomous:
        return LinearSystem(a * one, None, sw * one, None, se * one)
    return LinearSystem(a * one, b * one, sw * one, su * one, se * one)


def random_controllable_system(rng, n, m, radius=0.9):
    """Random stable, controllable pair with zero noise and unit input covariance."""
    while True:
        A = rng.standard_normal((n, n))
        A *= radius / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12)
        B = rng.standard_normal((n, m))
        sys = LinearSystem(A, B, np.zeros((n, n)), np.eye(m), np.zeros((n, n)))
        if min_singular_value(controllability_matrix(sys)) > 1e-2 and min_singular_value(A) > 1e-2:
            return sys


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    """Record a pass/fail line for the terminal summary and return ``ok``."""
    ACCEPTANCE_LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
