import numpy as np
import pytest

from dimscope.data import RngHandle


@pytest.fixture
def rng():
    return RngHandle(12345)


@pytest.fixture
def gauss_cloud():
    return np.random.default_rng(7).standard_normal((100, 10))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
