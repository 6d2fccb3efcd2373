from __future__ import annotations

import pytest

from schurkit.groups import Group


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SCHURKIT_CACHE", str(tmp_path / "cache"))


@pytest.fixture
def c4():
    return Group.parse("C4")


@pytest.fixture
def g36():
    return Group.parse("C4xC3^2")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        ok, detail = VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
