import re

_results = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed:
        status, dur = _results.get(key, ("PASS", 0.0))
        if report.failed:
            status = "FAIL"
        _results[key] = (status, dur + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (status, dur) in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {n:2d} {name.replace('_', ' '):<40s} {status}  ({dur:.1f}s)")
