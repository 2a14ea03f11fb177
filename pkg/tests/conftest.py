import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def binomial_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
