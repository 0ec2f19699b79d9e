import pytest

from griglab import core, enumeration


@pytest.fixture(scope="session")
def grig():
    return core.load_preset("grigorchuk")


@pytest.fixture(scope="session")
def ball6(grig):
    return enumeration.ball(grig, 6)


@pytest.fixture(scope="session")
def ball8(grig):
    return enumeration.ball(grig, 8)


@pytest.fixture(scope="session")
def ball12(grig):
    return enumeration.ball(grig, 12)
