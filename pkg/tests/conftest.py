"""Shared fixtures; collects one PASS/FAIL line per acceptance criterion."""

import contextlib
import time

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Context manager recording the outcome of one acceptance criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        t0 = time.perf_counter()
        info: dict = {}
        try:
            yield info
        except BaseException as exc:
            line = f"criterion {number:>2} FAIL  {title} ({time.perf_counter() - t0:.1f}s): {type(exc).__name__}: {exc}"
            _LINES.append(line.splitlines()[0])
            print(line)
            raise
        detail = info.get("detail", "")
        line = f"criterion {number:>2} PASS  {title} ({time.perf_counter() - t0:.1f}s){': ' + detail if detail else ''}"
        _LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
