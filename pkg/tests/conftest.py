import pytest

_CRITERIA: dict[str, tuple[bool, str]] = {}


class CriterionLog:
    """Records one pass/fail line per acceptance criterion."""

    def __init__(self, name: str):
        self.name = name
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def check(self, condition: bool, text: str) -> None:
        self.details.append(("ok: " if condition else "FAILED: ") + text)
        assert condition, text


@pytest.fixture
def criterion(request):
    def start(name: str) -> CriterionLog:
        log = CriterionLog(name)
        request.node._criterion = log
        return log

    return start


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    log = getattr(item, "_criterion", None)
    if log is None or report.when != "call":
        return
    passed = report.passed
    line = f"{'PASS' if passed else 'FAIL'}  {log.name}  |  " + "; ".join(log.details)
    _CRITERIA[log.name] = (passed, line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[name][1])
