"""Per-criterion summary for tests marked ``acceptance(N)``."""

import pytest

_results: dict[int, list] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark and mark.args:
            item.user_properties.append(("criterion", int(mark.args[0])))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        ok = report.passed
        if report.skipped:
            ok = None
        _results.setdefault(props["criterion"], []).append((ok, props.get("detail", ""), report.nodeid))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_results):
        rows = _results[crit]
        if any(ok is False for ok, _, _ in rows):
            verdict = "FAIL"
        elif all(ok is None for ok, _, _ in rows):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        details = "; ".join(d for _, d, _ in rows if d)
        tr.write_line(f"criterion {crit:2d}: {verdict}  {details}")


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement summary to the criterion line."""

    def put(text: str) -> None:
        record_property("detail", text)

    return put
