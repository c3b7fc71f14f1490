import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

SEED = 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def qubit_pair():
    return np.diag([0.0, 0.0]), np.diag([0.0, 1.0])


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, checks: dict[str, bool], detail: str = "") -> bool:
    """Store one PASS/FAIL line for an acceptance criterion; return overall status."""
    failed = [name for name, ok in checks.items() if not ok]
    status = "FAIL" if failed else "PASS"
    line = f"criterion {number:2d}: {status}"
    if detail:
        line += f"  {detail}"
    if failed:
        line += f"  failed: {', '.join(failed)}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return not failed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
