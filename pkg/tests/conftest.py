import numpy as np
import pytest

from symterp.imaging import SymmetrySpec
from symterp.synthdata import WheelParams, generate_wheel, sample_params

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _record(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def wheel6():
    return generate_wheel(WheelParams(n_spokes=6, seed=3))


@pytest.fixture(scope="session")
def spec6():
    return SymmetrySpec.for_shape((64, 64), 6)


@pytest.fixture(scope="session")
def symmetric_wheels():
    """Twenty asymmetry-0 wheels with mixed spoke counts."""
    return [(p, generate_wheel(p)) for p in sample_params(20, seed=11)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
