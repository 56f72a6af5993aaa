from collections import defaultdict

import pytest

CRITERIA = {
    1: "cone-volume identity",
    2: "tangent-polytope identity",
    3: "gap nonnegativity on certified candidates",
    4: "equality only for affine functions",
    5: "shell test implies certification",
    6: "radial integration lemma",
    7: "optimal translate",
    8: "linear counterexample on a non-candidate",
    9: "radial sampler correctness",
    10: "determinism",
}

_outcomes = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.skipped:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes[marker.args[0]].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        runs = _outcomes.get(n)
        if not runs:
            status = "NOT RUN"
        else:
            status = "PASS" if all(runs) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2} {name:<44} {status}")
