import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", report.nodeid)
    if m is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[int(m.group(1))] = (m.group(2), report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, outcome, detail = _CRITERIA[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num:2d} {verdict}  {name}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
