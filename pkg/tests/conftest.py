import math

import pytest

from contactflow.energetics import make_quartic_model
from contactflow.geometry import Channel2D, Disk2D, Interval1D

C0 = 2 * math.sqrt(2) / 3


@pytest.fixture(scope="session")
def quartic60():
    return make_quartic_model(math.pi / 3)


@pytest.fixture(scope="session")
def quartic90():
    return make_quartic_model(math.pi / 2)


@pytest.fixture(scope="session")
def channel_small():
    return Channel2D(nx=64, ny=32)


@pytest.fixture(scope="session")
def disk_small():
    return Disk2D(n_r=24, n_theta=64)


@pytest.fixture(scope="session")
def interval_fine():
    return Interval1D(n=512)
