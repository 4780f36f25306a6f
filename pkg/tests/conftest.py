from __future__ import annotations

import re

_results: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        m = re.match(r"test_c(\d+)_", name)
        _results.append((m.group(1) if m else "?", name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, outcome in _results:
        terminalreporter.write_line(f"criterion {num:>2}  {outcome:<6} {name}")
