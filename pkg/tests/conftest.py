import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, d, lam=1.0, n=None):
    xs = rng.standard_normal((n if n is not None else 2 * d, d))
    return lam * np.eye(d) + xs.T @ xs


ACCEPTANCE_LINES = []


@pytest.fixture
def accept():
    """Record and print one PASS/FAIL line, then assert the outcome."""
    def record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
