import os
import sys
import random

import pytest
from hypothesis import HealthCheck, settings

from orthoexplore import instances

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def staircases():
    """The 50-instance suite used by the competitive-ratio checks."""
    return instances.staircase_suite(50, seed=1)


def staircase(seed: int):
    return instances.random_staircase(random.Random(seed))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
