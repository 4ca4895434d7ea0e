import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from apef.curve import resample_uniform
from apef.initial import circle, ellipse

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_circle():
    return circle(128, 1.0)


@pytest.fixture
def ellipse21():
    return ellipse(128, 2.0, 1.0)


@pytest.fixture
def uniform_ellipse():
    return resample_uniform(ellipse(128, 1.2, 0.8))


def smooth_field(rng, n, modes=8):
    """Band-limited random periodic scalar on n nodes."""
    x = np.arange(n) / n
    y = rng.normal() * np.ones(n)
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2) / k
        y += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    return y


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for res in mod.RESULTS:
            terminalreporter.write_line(res.line())
