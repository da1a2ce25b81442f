import os

import numpy as np
import pytest

from critheat.spectral import PhysicalField, TorusGrid, set_fft_workers

set_fft_workers(int(os.environ.get("CRITHEAT_THREADS", "2")))


@pytest.fixture(scope="session")
def small_grid() -> TorusGrid:
    return TorusGrid(16, 2 * np.pi)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture()
def random_field(small_grid, rng) -> PhysicalField:
    return PhysicalField(small_grid, rng.standard_normal(small_grid.shape))


def cosine_field(grid: TorusGrid, amplitude: float = 1.0, mode: int = 1) -> PhysicalField:
    """a * cos(mode * dxi * x1), constant in the other directions."""
    profile = amplitude * np.cos(mode * grid.frequency_spacing * grid.x_axis)
    values = np.broadcast_to(profile[:, None, None, None], grid.shape).copy()
    return PhysicalField(grid, values)
