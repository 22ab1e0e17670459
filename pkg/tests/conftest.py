import pytest

CRITERIA = {
    1: "root-expansion order",
    2: "Vieta residuals",
    3: "Becker oracle",
    4: "modal-oracle equivalence",
    5: "full-solution rates",
    6: "first-order rates and degenerate control",
    7: "second-order vanishing",
    8: "multiplier norms",
    9: "Gamma limits",
    10: "lower-bound decomposition",
    11: "residual-order boundedness",
    12: "determinism",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(k, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k, name in CRITERIA.items():
        if k not in _outcomes:
            continue
        status = "PASS" if all(_outcomes[k]) else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d} {status}  {name}")
