import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chebk import RationalWeight

settings.register_profile("chebk", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("chebk")


@pytest.fixture
def fig_weight():
    """w(x) = (1 + x^2) / (2 - x^2)."""
    return RationalWeight.from_monomial([1, 0, 1], [2, 0, -1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
