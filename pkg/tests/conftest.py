import numpy as np
import pytest

from qmcmedian import rng as rngmod

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def make_rng():
    def factory(label="test", *idx, seed=20240601):
        return rngmod.stream(seed, label, *idx)

    return factory


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def record(criterion: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class ZeroRng:
    """Stand-in generator whose every draw is zero."""

    def integers(self, low, high=None, size=None, dtype=np.int64, endpoint=False):
        return np.zeros(size if size is not None else (), dtype=dtype)


@pytest.fixture
def zero_rng():
    return ZeroRng()
