import pytest

RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[RESULTS] = []


@pytest.fixture
def criterion(request):
    """Report one acceptance criterion; returns ``check(ok, detail)``."""
    results = request.config.stash[RESULTS]
    name = request.node.name

    def check(ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        results.append(line)
        print(line)
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[RESULTS]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
