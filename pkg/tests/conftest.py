import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "passed": True, "details": []})
    entry["passed"] = entry["passed"] and rep.passed
    if detail:
        entry["details"].append(detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        status = "PASS" if e["passed"] else "FAIL"
        line = f"[{status}] criterion {number}: {e['title']}"
        if e["details"]:
            line += " | " + " | ".join(e["details"])
        terminalreporter.write_line(line)
