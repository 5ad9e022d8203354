import report


def _key(label):
    num = "".join(ch for ch in label if ch.isdigit())
    return int(num or 0), label


def pytest_terminal_summary(terminalreporter):
    if not report.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(report.RESULTS, key=_key):
        terminalreporter.write_line(report.RESULTS[label])
