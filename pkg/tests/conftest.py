import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from wstasks import RuntimeConfig  # noqa: E402

_criteria: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def config():
    """Small unpinned runtime: 4 workers in two teams of two."""
    return RuntimeConfig(workers=4, team_size=2, pin=False)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if rep.skipped:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
            _criteria[number] = ("SKIP", title, reason.replace("Skipped: ", ""))
        elif rep.failed:
            _criteria[number] = ("FAIL", title, rep.longrepr.reprcrash.message.splitlines()[0]
                                 if hasattr(rep.longrepr, "reprcrash") else "")
        else:
            _criteria[number] = ("PASS", title, getattr(item, "_criterion_note", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title, note = _criteria[number]
        line = f"criterion {number:2d} {status}  {title}"
        if note:
            line += f"  ({note})"
        tr.write_line(line)
