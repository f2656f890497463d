import numpy as np
import pytest

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(ACCEPTANCE_RESULTS.items()):
            terminalreporter.write_line(f"{name}: {status}")
