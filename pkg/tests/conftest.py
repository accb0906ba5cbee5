"""One visible verdict line per acceptance criterion, whatever the verbosity."""

import re

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = _ACCEPTANCE.search(report.nodeid)
    if match:
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {int(match.group(1))}: {verdict}", flush=True)
