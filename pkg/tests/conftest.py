import numpy as np
import pytest

from stfrac.operators import TimeOperators, build_space_1d, build_U_2d, AllAtOnceSystem, sample_coefficient_2d


def make_system_1d(alpha, N, M, theta=0.5, a=None):
    dx, dt = 1.0 / (N + 1), 1.0 / M
    space = build_space_1d(alpha, N, a, gamma=dt / dx**alpha)
    return AllAtOnceSystem(space, TimeOperators(theta, M))


def make_system_2d(alpha1, alpha2, N1, N2, M, theta=0.5, a=None):
    dt = 1.0 / M
    g1 = dt * (N1 + 1) ** alpha1
    g2 = dt * (N2 + 1) ** alpha2
    values, _ = sample_coefficient_2d(a, N1, N2)
    return AllAtOnceSystem(build_U_2d(alpha1, alpha2, N1, N2, g1, g2, values), TimeOperators(theta, M))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
