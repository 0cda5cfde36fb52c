import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from vdlab.nevanlinna import RadiusGrid

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

EQUATIONS = Path(__file__).resolve().parent.parent / "equations"


@pytest.fixture(scope="session")
def equations_dir():
    return EQUATIONS


@pytest.fixture(scope="session")
def default_grid():
    return RadiusGrid.geometric(1.0, 50.0, 200)


@pytest.fixture(scope="session")
def coarse_grid():
    return RadiusGrid.geometric(1.0, 50.0, 60)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
