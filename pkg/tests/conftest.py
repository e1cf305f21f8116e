import pytest

# criterion number -> [title, passed, seconds, notes]
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the criterion's summary line."""
    marker = request.node.get_closest_marker("acceptance")

    def add(text):
        if marker is not None:
            _entry(marker)[3].append(text)

    return add


def _entry(marker):
    number, title = marker.args
    return _ACCEPTANCE.setdefault(number, [title, True, 0.0, []])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.skipped:
        return
    entry = _entry(marker)
    if report.when == "call":
        entry[2] += report.duration
    if report.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, seconds, notes = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {status}  {title}  ({seconds:.2f} s)"
        if notes:
            line += "  [" + "; ".join(notes) + "]"
        terminalreporter.write_line(line)
