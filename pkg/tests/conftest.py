from __future__ import annotations

import re

import pytest

from confh.ce import betti_table
from confh.manifold import builtin

_TABLES: dict = {}
_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def table_for(name: str, n_max: int):
    """Betti table through exactly ``n_max``, memoised across the session."""
    have = _TABLES.get(name)
    if have is None or have.complete_through < n_max:
        have = betti_table(builtin(name), n_max, modular=True, seed=7)
        _TABLES[name] = have
    return have.truncated(n_max)


@pytest.fixture(scope="session")
def tables():
    return table_for


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)_(\w+)", item.name)
    if m and rep.when == "call":
        k = int(m.group(1))
        # parametrized cases share a line; one failure marks the criterion
        failed = rep.failed or _ACCEPTANCE.get(k, ("PASS",))[0] == "FAIL"
        title = _ACCEPTANCE.get(k, (None, m.group(2).replace("_", " ")))[1]
        _ACCEPTANCE[k] = ("FAIL" if failed else "PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {title}")
