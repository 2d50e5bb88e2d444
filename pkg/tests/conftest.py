import numpy as np
import pytest

# market layout: 11 monthly OIS points plus 10 annual bootstrapped IRS points
MARKET_TAUS = np.r_[np.arange(1, 12) / 12.0, np.arange(1, 11, dtype=float)]

_acceptance_lines = []


def record_acceptance(criterion, ok, detail):
    _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def market_taus():
    return MARKET_TAUS.copy()


def random_design(rng, n=21, p=3):
    """Intercept plus p-1 Gaussian regressors."""
    return np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
