from __future__ import annotations

import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion.

    The line is set to FAIL up front and switched to PASS by calling the
    returned function after all assertions succeed.
    """
    number = request.node.get_closest_marker("criterion").args[0]
    title = request.node.get_closest_marker("criterion").args[1]
    _ACCEPTANCE[number] = f"criterion {number:2d} FAIL  {title}"

    def passed(detail: str = "") -> None:
        line = f"criterion {number:2d} PASS  {title}"
        _ACCEPTANCE[number] = f"{line}  [{detail}]" if detail else line
        print(_ACCEPTANCE[number])

    return passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
