import contextlib
import time

import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(number, title, limit_s=None):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit_s is not None:
                assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"
        except BaseException as exc:
            _LINES.append(f"FAIL  [{number:>2}] {title}: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}")
            raise
        _LINES.append(f"PASS  [{number:>2}] {title} ({elapsed:.2f}s)")

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
