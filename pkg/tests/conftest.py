import math

import pytest

from chermnykh import SUN_EARTH_MU, SUN_JUPITER_MU, make_params


@pytest.fixture
def classical_earth():
    return make_params(SUN_EARTH_MU)


@pytest.fixture
def table_params():
    """Both mass ratios with T=0.01, q1=0.75, A2=0.05, Mb=0.4."""
    return {
        "sun-jupiter": make_params(SUN_JUPITER_MU, q1=0.75, a2=0.05, mb=0.4, t_belt=0.01),
        "sun-earth": make_params(SUN_EARTH_MU, q1=0.75, a2=0.05, mb=0.4, t_belt=0.01),
    }


SQRT3_2 = math.sqrt(3.0) / 2.0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
