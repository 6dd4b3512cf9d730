import numpy as np
import pytest

_ACCEPTANCE_LINES = []


def rician_draws(rng, s, sigma, n):
    """Envelope of a complex Gaussian with mean s and per-axis std sigma."""
    return np.abs(s + sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))


@pytest.fixture
def report():
    def _report(criterion, ok, detail):
        line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
