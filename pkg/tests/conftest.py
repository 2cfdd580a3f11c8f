"""Shared pytest wiring: a per-criterion summary for the acceptance suite.

Each acceptance test is named test_criterion_<nn>_<slug>; after the run a
one-line verdict per criterion is printed so the suite's outcome can be
read without scanning the full test log.
"""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            m = _CRITERION.search(nodeid)
            if not m:
                continue
            num, slug = int(m.group(1)), m.group(2)
            # setup/teardown failures must not mask a call failure
            if verdicts.get(num, ("", "PASS"))[1] == "FAIL":
                continue
            verdicts[num] = (slug, label)
    if not verdicts:
        return
    writer = terminalreporter
    writer.section("acceptance criteria")
    for num in sorted(verdicts):
        slug, label = verdicts[num]
        writer.write_line(f"criterion {num:02d} {label}  {slug}")
