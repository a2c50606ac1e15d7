import pytest

from sfif import presets

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            num, title = m.args
            entry = _criteria.setdefault(num, {"title": title, "outcomes": [], "ids": set()})
            entry["ids"].add(item.nodeid)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for num, entry in _criteria.items():
        if report.nodeid in entry["ids"]:
            entry["outcomes"].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    ran = {n: e for n, e in _criteria.items() if e["outcomes"]}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        e = ran[num]
        status = "PASS" if all(e["outcomes"]) else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {e['title']}")


@pytest.fixture(scope="session")
def sample():
    return presets.sample_sifs()
