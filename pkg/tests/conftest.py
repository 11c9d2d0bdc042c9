"""Shared fixtures: the default simulation setup and a seeded RNG."""

import numpy as np
import pytest

from rydsim.config import build_setup, load_config


@pytest.fixture(scope="session")
def setup():
    """Default parameter set (50S/48S pair, OD 25)."""
    return build_setup(load_config(None, "gain-scan"))


@pytest.fixture()
def rng():
    return np.random.default_rng(7)


# one PASS/FAIL line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
