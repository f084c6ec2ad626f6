"""Shared fixtures; collects one PASS/FAIL line per acceptance criterion."""
import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """``criterion(key, ok, detail)`` records a line; unrecorded criteria count as failed."""
    keys = []

    def record(key, ok, detail=""):
        keys.append(key)
        ACCEPTANCE[key] = (bool(ok), detail)
        print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    yield record
    if not keys:
        ACCEPTANCE[request.node.name] = (False, "test aborted before recording a result")


def _sort_key(key):
    head = key.split()[0]
    return (int(head) if head.isdigit() else 99, key)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE, key=_sort_key):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
