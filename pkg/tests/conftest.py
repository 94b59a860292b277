import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def reference_cache(tmp_path_factory):
    """Reference solutions are cached once per test session, never in $HOME."""
    path = tmp_path_factory.mktemp("reference_cache")
    old = os.environ.get("NESTEROV_ODE_CACHE")
    os.environ["NESTEROV_ODE_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("NESTEROV_ODE_CACHE", None)
    else:
        os.environ["NESTEROV_ODE_CACHE"] = old


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, passed, detail, seconds, budget)``."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, passed, detail, seconds, budget):
        ok = passed and seconds <= budget
        line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {detail}  "
                f"[{seconds:.2f} s of {budget:g} s]")
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
