import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """Record and print one pass/fail line per acceptance criterion."""
    def report(number, ok, detail=''):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _LINES[number] = line
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section('acceptance criteria')
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
