import pytest

from rsma_outage.config import build_config


@pytest.fixture
def table1():
    """Reference scenario at 10 dBm with perfect CSIR and SIC."""
    return build_config()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
