import sys
import warnings

import pytest

from gl3twist import gl3form

warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture(scope="session")
def d3():
    return gl3form.d3_form()


@pytest.fixture(scope="session")
def sym2():
    return gl3form.sym2_delta_form()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
