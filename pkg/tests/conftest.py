"""Shared pytest plumbing: the acceptance-criteria summary block.

tests/test_acceptance.py appends one `[PASS]`/`[FAIL] criterion N` line
per criterion to `acceptance_log`; printing them from a terminal-summary
hook keeps them visible for passing tests too (pytest's fd capture would
otherwise swallow them).
"""

acceptance_log: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_log:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log:
            terminalreporter.write_line(line)
