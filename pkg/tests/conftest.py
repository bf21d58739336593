import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spa_kit.tfcore import RationalSystem

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def siso(*terms):
    """SISO system from ``(pole, [c_1, ..., c_m])`` pairs."""
    return RationalSystem([(q, [np.array([[c]], dtype=complex) for c in cs]) for q, cs in terms],
                          dims=(1, 1))


@pytest.fixture
def make_siso():
    return siso


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
