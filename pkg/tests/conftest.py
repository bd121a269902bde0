import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import liouvillekit as lk

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CAT_RATE = math.log((3 + math.sqrt(5)) / 2)


@pytest.fixture(scope="session")
def cat():
    return lk.cat_suspension()


@pytest.fixture(scope="session")
def geodesic():
    return lk.geodesic_frame_local()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(model, rng, n):
    return model.sample_points(rng, n)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
