import numpy as np
import pytest

from gbozk import GridSpec, RealField2D, make_grid


@pytest.fixture
def grid_2pi() -> GridSpec:
    return make_grid(32, 32, 2.0 * np.pi, 2.0 * np.pi)


@pytest.fixture
def grid_box() -> GridSpec:
    return make_grid(128, 128, 32.0, 32.0)


def gaussian_field(grid, amplitude=1.0, sx=1.0, sy=1.0, cx=0.0, cy=0.0):
    X, Y = grid.meshgrid()
    return RealField2D(
        grid, amplitude * np.exp(-((X - cx) / sx) ** 2 - ((Y - cy) / sy) ** 2)
    )


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return RealField2D(grid, scale * rng.standard_normal((grid.ny, grid.nx)))
