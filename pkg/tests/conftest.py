import time

import pytest

from pqsurf.catalog import load_catalog
from pqsurf.pipeline import RunConfig, collect_candidates, run_classification

# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def group(catalog):
    def get(order, gid):
        return catalog.get(order, gid).group
    return get


class _Runs:
    def __init__(self, catalog):
        self.catalog = catalog
        self._tables = {}
        self._items = {}
        self.seconds = {}

    def table(self, **kw):
        key = tuple(sorted(kw.items()))
        if key not in self._tables:
            t0 = time.perf_counter()
            self._tables[key] = run_classification(RunConfig(**kw), self.catalog)
            self.seconds[key] = time.perf_counter() - t0
        return self._tables[key]

    def items(self, **kw):
        key = tuple(sorted(kw.items()))
        if key not in self._items:
            self._items[key] = collect_candidates(RunConfig(**kw), self.catalog)
        return self._items[key]


@pytest.fixture(scope="session")
def runs(catalog):
    return _Runs(catalog)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
