import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gicreg.model import ChannelParams

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py; printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def zic():
    """Z-channel with strong one-sided interference."""
    return ChannelParams(6.0, 1.0, 2.0, 0.0)


@pytest.fixture
def fig_ch():
    return ChannelParams(6.0, 1.0, 3.0, 0.1)


@pytest.fixture
def weak_ch():
    return ChannelParams(1.0, 6.0, 0.1, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_channel(rng) -> ChannelParams:
    return ChannelParams(
        float(rng.uniform(0.1, 20)), float(rng.uniform(0.1, 20)), float(rng.uniform(0, 4)), float(rng.uniform(0, 4))
    )
