import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=acceptance_log.order):
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("CIMX_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="long replication run; set CIMX_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
