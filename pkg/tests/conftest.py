from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pclab.geometry import egg, expflat, unit_ball

settings.register_profile("pclab", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pclab")

ACCEPTANCE_LINES: dict[str, str] = {}


def record(key: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES[key] = f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def ball2():
    return unit_ball(2)


@pytest.fixture(scope="session")
def ball3():
    return unit_ball(3)


@pytest.fixture(scope="session")
def egg12():
    return egg((1, 2))


@pytest.fixture(scope="session")
def flat():
    return expflat()


@pytest.fixture
def e1():
    return np.array([1.0, 0.0], dtype=complex)
