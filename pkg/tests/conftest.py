import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

# Acceptance criteria outcomes, printed as one line each after the run.
CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; the test body decides pass/fail."""
    name = request.node.get_closest_marker("criterion").args[0]
    notes: list[str] = []
    yield notes
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    CRITERIA.append((name, passed, "; ".join(notes)))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, note in CRITERIA:
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        if note:
            line += f"  [{note}]"
        terminalreporter.write_line(line)
