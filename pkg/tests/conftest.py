import json
import os

import numpy as np
import pytest

from multisoliton.diagnostics import make_rate_params
from multisoliton.grid import Grid1D
from multisoliton.integrable import KdvNSolitonSpec
from multisoliton.solver import exact_kdv_run

HERE = os.path.dirname(os.path.abspath(__file__))
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").split(".")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def frozen():
    with open(os.path.join(HERE, "oracles", "frozen.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def kdv2():
    return KdvNSolitonSpec((1.0, 4.0))


@pytest.fixture(scope="session")
def exact_grid():
    return Grid1D(-100.0, 300.0, 4096)


@pytest.fixture(scope="session")
def exact_run(kdv2, exact_grid):
    """Exact two-soliton snapshots at integer times 0..60."""
    return exact_kdv_run(kdv2, exact_grid, np.arange(0.0, 61.0, 1.0))


@pytest.fixture(scope="session")
def rate_params(kdv2):
    return make_rate_params(kdv2.speeds, alpha=0.5, beta=5.0)
