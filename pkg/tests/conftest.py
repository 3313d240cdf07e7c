"""
Shared fixtures for the solver tests
"""
import numpy as np
import pytest

from src.core import BoundaryKind, BoundarySpec, FieldSet, Grid2D, PhysParams, fill_ghosts


def make_fields(grid, h, qx=0.0, qy=0.0, z=0.0):
    """FieldSet with every cell (ghosts included) set from callables of (x, y) or constants"""
    xc, yc = grid.cell_centers()
    fields = FieldSet.zeros(grid)
    for comp, value in enumerate((h, qx, qy)):
        fields.state[comp] = value(xc, yc) if callable(value) else value
    fields.z[...] = z(xc, yc) if callable(z) else z
    return fields


@pytest.fixture
def params():
    return PhysParams(g=9.81, k_manning=0.0)


@pytest.fixture
def small_grid():
    return Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 8, 6, degree=0)


@pytest.fixture
def neumann():
    return BoundarySpec.uniform(BoundaryKind.NEUMANN)


@pytest.fixture
def walls():
    return BoundarySpec.uniform(BoundaryKind.WALL)


@pytest.fixture
def periodic():
    return BoundarySpec.uniform(BoundaryKind.PERIODIC)


@pytest.fixture
def lake_at_rest(small_grid, neumann):
    """Wet lake at rest over a smooth bump"""
    fields = make_fields(
        small_grid,
        h=lambda x, y: 1.0 - 0.3 * np.exp(-20.0 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)),
        z=lambda x, y: 0.3 * np.exp(-20.0 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)),
    )
    return fill_ghosts(fields, small_grid, neumann)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
