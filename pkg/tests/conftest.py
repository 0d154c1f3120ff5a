"""Collects acceptance outcomes and prints one line per criterion."""

_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = int(name.split("_")[2])
        outcome = report.outcome
        if hasattr(report, "wasxfail") and report.skipped:
            outcome = "xfailed"
        elif report.failed and "XPASS" in str(report.longrepr):
            outcome = "xpassed"
        detail = dict(report.user_properties).get("measured", "")
        _CRITERIA[number] = (name, outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, outcome, detail = _CRITERIA[number]
        verdict = {
            "passed": "PASS",
            "xfailed": "FAIL (known, see ledger)",
            "xpassed": "PASS (was expected to fail; update the ledger)",
        }.get(outcome, "FAIL")
        label = name.split("_", 3)[-1].replace("_", " ")
        line = f"criterion {number:2d} {verdict}  {label}"
        if detail:
            line += f"  [{detail}]"
        tr.write_line(line)
