import functools

import pytest

from flatkvol.surface import build_bouw_moller

TEST_PAIRS = [(3, 4), (4, 3), (5, 4), (4, 5), (3, 5), (2, 7)]
COPRIME_PAIRS = [(3, 4), (4, 3), (5, 4)]


@functools.lru_cache(maxsize=None)
def bm(m, n):
    return build_bouw_moller((m, n))


@pytest.fixture
def s34():
    return bm(3, 4)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, detail = RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
