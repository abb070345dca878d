"""Prints the acceptance verdict lines after the normal pytest output.

The acceptance tests record one "[PASS]/[FAIL] <criterion>" line each; fd
capture would eat a plain print, so a terminal-summary hook emits them.
"""

import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
