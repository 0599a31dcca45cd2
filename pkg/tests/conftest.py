import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def h3():
    from carnot_mcp.corank1 import from_blocks

    return from_blocks(0, [1])


@pytest.fixture(scope="session")
def kernel4():
    """k = 4, A = blockdiag(0_2, J): the non-ideal example."""
    from carnot_mcp.corank1 import from_blocks

    return from_blocks(2, [1])


@pytest.fixture(scope="session")
def h5():
    from carnot_mcp.corank1 import from_blocks

    return from_blocks(0, [1, 1])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
