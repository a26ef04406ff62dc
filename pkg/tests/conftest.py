"""Shared fixtures: the desk-scale pipeline and the acceptance report.

The pipeline runs in-process through ``genpot.cli.main`` exactly as a user
would from the shell.  It is session-scoped because one run trains eight
models, and it only starts when an acceptance test asks for it.
"""
import pytest
from pipeline import run_desk_pipeline

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    return run_desk_pipeline(tmp_path_factory.mktemp("desk-a"))


@pytest.fixture(scope="session")
def desk_rerun(tmp_path_factory, desk_run):
    return run_desk_pipeline(tmp_path_factory.mktemp("desk-b"))


@pytest.fixture
def verdict(request):
    """``verdict(n, title, ok, detail)`` records one acceptance line and asserts ``ok``."""

    def record(n, title, ok, detail=""):
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        request.config.stash.setdefault(ACCEPTANCE, []).append((n, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
