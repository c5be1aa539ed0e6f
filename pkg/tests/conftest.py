import pathlib

import pytest

from tankmate import default_rules, load_kb

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def kb():
    return load_kb()


@pytest.fixture(scope="session")
def rules():
    return default_rules()


@pytest.fixture(scope="session")
def check_temp_text():
    return (FIXTURES / "check_temp.rules").read_text()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                lines.append((nodeid, label))
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid, label in sorted(lines):
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{label}: {name}")
