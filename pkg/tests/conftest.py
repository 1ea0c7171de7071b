import pytest

from hiersearch.hierarchy import TreeParams
from hiersearch.netgen import GraphParams, generate


@pytest.fixture
def make_graph():
    def _make(b, h, beta=1.0, c_k=1.0, seed=0):
        return generate(GraphParams(TreeParams(b, h), beta, c_k, seed))

    return _make


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
