import numpy as np
import pytest

from mohaea.core import Population


def pop_from_objectives(F, n=2, operators=("SBX", "UU", "SM")):
    """Population with the given objectives and placeholder decision data."""
    F = np.asarray(F, dtype=np.float64)
    N, m = F.shape
    k = len(operators)
    return Population(
        X=np.zeros((N, n)), F=F, rates=np.full((N, k), 1.0 / k),
        directions=np.full((N, m), 1.0 / m), operators=tuple(operators),
    )


def brute_dominates(a, b):
    le = all(x <= y for x, y in zip(a, b))
    lt = any(x < y for x, y in zip(a, b))
    return le and lt


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance criteria report: tests append "PASS/FAIL ..." lines through the
# `criterion` fixture and they are echoed once at the end of the session.
_CRITERIA_LINES: list[str] = []


@pytest.fixture
def criterion():
    def report(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _CRITERIA_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA_LINES:
            terminalreporter.write_line(line)
