from __future__ import annotations

import pytest

from cspfolio.synthetic import planted_scenario, random_scenario

RUNS_2x2 = """instance,solver,status,time
i1,A,solved,10.5
i1,B,timeout,1800
i2,A,error,3.25
i2,B,solved,99
"""
FEATURES_2x2 = """instance,cost,f1,f2
i1,1.5,0.1,2
i2,0.5,-3,4.25
"""
META_1800 = """key,value
timeout_seconds,1800
"""


@pytest.fixture
def texts_2x2():
    return RUNS_2x2, FEATURES_2x2, META_1800


@pytest.fixture(scope="session")
def synth20x4():
    return random_scenario(seed=7, n_instances=20, n_solvers=4, n_features=3)


@pytest.fixture(scope="session")
def planted():
    return planted_scenario(seed=42)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
