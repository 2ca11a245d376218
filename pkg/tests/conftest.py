import pytest

from wavecert.interval import IntervalContext


@pytest.fixture(scope="session")
def ctx():
    return IntervalContext(256)


@pytest.fixture(scope="session")
def ctx_fast():
    return IntervalContext(128)
