import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion; printed at the end of the run."""
    state = {}

    def declare(label: str):
        state["label"] = label

    yield declare
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    _LINES.append(f"{'PASS' if ok else 'FAIL'}  {state.get('label', request.node.name)}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
