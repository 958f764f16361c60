import math

import pytest

from txpolicy import ChannelModel, ValuationModel

# filled by test_acceptance; printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def paper_channel():
    return ChannelModel(alpha0=0.2, alpha1=0.8, mu=0.5, rho_th=0.5)


@pytest.fixture
def eps_paper():
    return 0.2 + 0.6 * math.exp(-0.25)


@pytest.fixture
def expo():
    return ValuationModel.exponential(1.0)


@pytest.fixture
def unif():
    return ValuationModel.uniform(0.0, 2.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
