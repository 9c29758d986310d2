import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polyscat.helmholtz import ScatterConfig
from polyscat.scene import Scatterer2D

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def square_polys(side=1.0, center=(0.0, 0.0)):
    h = side / 2
    cx, cy = center
    return [[(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]]


def regular_polygon(n, a=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return a * np.column_stack([np.cos(th), np.sin(th)])


@pytest.fixture
def square():
    return Scatterer2D(square_polys())


@pytest.fixture
def fast_cfg():
    return ScatterConfig(quad_order=128)
