from pathlib import Path

import pytest
from hypothesis import settings

from burstnet import fixture_path
from burstnet.netcore import load_network

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def net931():
    return load_network(fixture_path("canonical_931.net"))


@pytest.fixture
def fixtures_dir() -> Path:
    return Path(str(fixture_path("")))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
