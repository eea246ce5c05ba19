import os

import pytest
from hypothesis import settings

from gkitaev.lattice import LatticeDims, build_lattice

settings.register_profile("default", derandomize=True, deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GK_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="extended suite; set GK_EXTENDED=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def tiny():
    return build_lattice(LatticeDims(1, 1, 1, 2))


@pytest.fixture(scope="session")
def lat222():
    return build_lattice(LatticeDims(2, 2, 2, 2))


@pytest.fixture(scope="session")
def lat333():
    return build_lattice(LatticeDims(3, 3, 3, 2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS.values():
            terminalreporter.write_line(line)
