import pytest

from hyperperc.graph import make_graph


@pytest.fixture
def h23():
    return make_graph(2, 3)


@pytest.fixture
def k100():
    return make_graph(1, 100)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k].line())
