import pytest

_results: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        measured = "; ".join(f"{k}={v}" for k, v in report.user_properties)
        _results.append((marker.args[0], "PASS" if report.passed else "FAIL", measured))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict, measured in _results:
        line = f"{verdict}  {label}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
