from __future__ import annotations

import pytest

_RESULTS: dict[str, tuple[bool, str]] = {}


class AcceptanceLog:
    def record(self, criterion: str, ok: bool, detail: str) -> bool:
        prev = _RESULTS.get(criterion)
        if prev is not None:
            ok = ok and prev[0]
            detail = prev[1] + "; " + detail
        _RESULTS[criterion] = (ok, detail)
        return ok


@pytest.fixture(scope="session")
def acceptance() -> AcceptanceLog:
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_RESULTS, key=lambda s: (int(s.split()[0]), s)):
        ok, detail = _RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}")
