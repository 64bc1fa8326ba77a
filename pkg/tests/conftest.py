import numpy as np
import pytest
from hypothesis import strategies as st


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def qubit_kets():
    """Hypothesis strategy for normalized qubit kets."""
    comp = st.floats(-1, 1, allow_nan=False)
    return st.tuples(comp, comp, comp, comp).filter(
        lambda v: sum(x * x for x in v) > 1e-3
    ).map(lambda v: np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]]) / np.sqrt(sum(x * x for x in v)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
