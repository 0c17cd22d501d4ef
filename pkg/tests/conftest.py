import numpy as np
import pytest

from iskf import model as model_mod

from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def vehicle():
    return model_mod.vehicle_model()


@pytest.fixture(scope="session")
def cstr():
    return model_mod.cstr_model()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
