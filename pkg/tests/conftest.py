import pytest

_LINES: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


class _Criterion:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion(request):
    """Collects a one-line summary for an acceptance criterion."""
    rec = _Criterion()
    yield rec
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    label = request.node.function.__doc__.strip().splitlines()[0]
    line = f"{status}  {label}"
    if rec.detail:
        line += f"  [{rec.detail}]"
    _LINES[request.node.name] = line
    print(f"\n{line}")


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for name in sorted(_LINES, key=lambda n: int(n.split("_")[1])):
            terminalreporter.write_line(_LINES[name])
