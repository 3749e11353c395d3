import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def P2():
    from gategraph import new_graph
    return new_graph([[0, 1], [1, 0]])


@pytest.fixture
def K3():
    from gategraph import new_graph
    return new_graph(np.ones((3, 3), dtype=int) - np.eye(3, dtype=int))


@pytest.fixture
def mini():
    from gategraph import mini_double_element
    return mini_double_element()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
