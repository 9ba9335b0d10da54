import pytest

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Store one PASS/FAIL line; the terminal summary prints them in order."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running 2D minimizations")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
