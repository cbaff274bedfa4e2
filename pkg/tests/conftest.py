import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion lines recorded by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def _criterion_order(line):
    tag = line.split()[1]
    return int("".join(c for c in tag if c.isdigit())), tag


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion_order):
            terminalreporter.write_line(line)
