import shutil
import sys

import pytest

sys.path.insert(0, __import__("os").path.dirname(__file__))

HAVE_CC = any(shutil.which(cc) for cc in ("gcc", "clang", "cc"))

needs_cc = pytest.mark.skipif(not HAVE_CC, reason="no system C compiler")

EQ1 = 'SC(argv[2], "hello", SKIP, NEXT) IC(atoll(argv[1]), 69, FAIL, { return 0; })'

_acceptance = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance:
        terminalreporter.write_line(line)
