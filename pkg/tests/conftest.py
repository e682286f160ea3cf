import functools

import pytest

from lpdist.stats import run_batch

# (criterion label, PASS/FAIL, detail) rows collected by the acceptance suite
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@functools.lru_cache(maxsize=None)
def cached_batch(p, n, domain, trials, seed):
    """Batches are deterministic, so tests asking for identical draws can share them."""
    return run_batch(p, n, domain, trials, seed)


@pytest.fixture
def batch_cache():
    return cached_batch


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
