import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pctsp.instance import Instance  # noqa: E402


@pytest.fixture
def square_k2():
    """Unit square, class 0 on the left edge, class 1 on the right edge."""
    return Instance.euclidean([(0, 0), (1, 0), (0, 1), (1, 1)], [0, 1, 0, 1])


@pytest.fixture
def square_corners():
    """Unit square corners in cyclic order."""
    return [(0, 0), (1, 0), (1, 1), (0, 1)]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    holder = {}
    yield holder
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {holder.get('name', request.node.name)}: {holder.get('detail', '')}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
