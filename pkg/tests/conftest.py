import hypothesis
import numpy as np
import pytest

from qkdwave.grid import DwdmParams, QkdParams, build_grid, default_raman_table
from qkdwave.system import LinkContext

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def grid():
    return build_grid(1530, 1565, 200)


@pytest.fixture(scope="session")
def table():
    return default_raman_table()


@pytest.fixture
def ctx(grid, table):
    return LinkContext(grid, table, QkdParams(), DwdmParams(length_km=45))


@pytest.fixture
def small_ctx(table):
    """Eight-slot grid so exhaustive oracles stay cheap."""
    return LinkContext(build_grid(1540, 1552, 200), table, QkdParams(), DwdmParams(length_km=45))


@pytest.fixture
def rng():
    return np.random.default_rng(20240519)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict; echoed again in the terminal summary."""

    def _report(number, label, ok, detail):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {label}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
