import re

import pytest

_CRITERIA: dict[int, list[str]] = {}
_TITLES: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num = int(m.group(1))
        _TITLES[num] = m.group(2).split("[")[0].replace("_", " ")
        _CRITERIA.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        outcomes = _CRITERIA[num]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {verdict}  {_TITLES[num]} ({len(outcomes)} case(s))")


@pytest.fixture(scope="session")
def rng():
    import numpy as np
    return np.random.default_rng(20240917)
