import pytest


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def criterion_log(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.acceptance_lines


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(config.acceptance_lines):
            terminalreporter.write_line(line)
