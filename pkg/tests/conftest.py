import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vactrap.grid import make_grid
from vactrap.params import microwave_preset, optical_preset


@pytest.fixture(scope="session")
def optical():
    return optical_preset()


@pytest.fixture(scope="session")
def microwave():
    return microwave_preset()


@pytest.fixture(scope="session")
def small_optical(optical):
    """Optical rates and laser on a compact trap (sigma = 8, 128 points)."""
    return optical.replace(cavity_width=8.0)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(128, 32.0)
