"""
Tests for the first-order well-balanced scheme
"""
from dataclasses import replace

import numpy as np
import pytest

from src.cases import get_case, init_case
from src.core import ConservedState, FieldSet, Grid2D, PhysParams, fill_ghosts
from src.exceptions import NumericalFault
from src.riemann1d import numerical_flux
from src.scheme_fo import (
    FirstOrderScheme, apply_explicit, cfl_dt, explicit_step, first_order_increment, step_report,
)
from tests.conftest import make_fields


def case_scheme(name, nx, ny, **overrides):
    case = replace(get_case(name), **overrides)
    params = PhysParams(g=case.g, k_manning=case.k_manning)
    grid = Grid2D.from_box(case.box, nx, ny, degree=0)
    scheme = FirstOrderScheme(grid, params, case.boundaries(grid, 0, params), case.cutoff)
    return scheme, scheme.fill(init_case(case, grid, 0, params))


def run_steps(scheme, fields, n, cfl=0.5):
    for _ in range(n):
        fields = scheme.step(fields, scheme.cfl_dt(fields, cfl))
    return fields


class TestTimeStep:
    """Test the CFL time step"""

    def test_rest_state(self):
        """Test the time step of a uniform lake"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 10, 10)
        fields = make_fields(grid, h=1.0)
        assert cfl_dt(fields, grid, PhysParams(), 0, 1.0) == pytest.approx(0.1 / (2.0 * np.sqrt(9.81)), rel=1e-12)

    def test_high_degree_exponent(self):
        """Test degrees above three shrink the step like a power of the cell size"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 10, 10, degree=5)
        fields = make_fields(grid, h=1.0)
        assert cfl_dt(fields, grid, PhysParams(), 5, 1.0) == pytest.approx(0.1 ** (5.0 / 3.0) / (2.0 * np.sqrt(9.81)))

    def test_report_counts_dry_cells(self, small_grid):
        """Test the step report counts dry interior cells"""
        fields = make_fields(small_grid, h=lambda x, y: np.where(x < 0.5, 1.0, 0.0))
        report = step_report(fields, small_grid, PhysParams(), 0, 0.5)
        assert report.n_dry_cells == small_grid.nx * small_grid.ny // 2
        assert report.lambda_max == pytest.approx(np.sqrt(9.81))


class TestWellBalance:
    """Test preservation of steady states"""

    def test_lake_at_rest_bump(self, lake_at_rest, small_grid, neumann):
        """Test the increment vanishes on a wet lake at rest"""
        inc = first_order_increment(lake_at_rest, small_grid, PhysParams(), np.inf)
        total = inc.flux_div_x + inc.flux_div_y
        total[1:] += inc.topo_src
        assert np.abs(total).max() <= 1e-12

    def test_lake_at_rest_cone(self):
        """Test the emerged cone lake stays at rest with friction"""
        scheme, fields = case_scheme('lake_at_rest_cone', 12, 12)
        out = run_steps(scheme, fields, 20)
        rows, cols = scheme.grid.interior
        assert np.abs(out.h - fields.h)[rows, cols].max() <= 1e-12
        assert np.abs(out.state[1:, rows, cols]).max() <= 1e-12

    def test_friction_steady_state(self):
        """Test the discrete friction steady state is a fixed point"""
        scheme, fields = case_scheme('friction_steady_perturbed', 20, 1, perturbation=None)
        out = run_steps(scheme, fields, 10)
        rows, cols = scheme.grid.interior
        assert np.abs(out.h - fields.h)[rows, cols].max() <= 1e-10
        assert np.abs(out.qx - fields.qx)[rows, cols].max() <= 1e-10

    def test_friction_steady_state_along_y(self, neumann):
        """Test the friction steady state laid along y is a fixed point and mirrors the x run"""
        case = replace(get_case('friction_steady_perturbed'), perturbation=None)
        params = PhysParams(g=case.g, k_manning=case.k_manning)
        x0, x1, y0, y1 = case.box
        grid_x = Grid2D.from_box(case.box, 20, 1)
        grid_y = Grid2D.from_box((y0, y1, x0, x1), 1, 20)
        along_x = init_case(case, grid_x, 0, params)
        along_y = FieldSet(np.transpose(along_x.state[[0, 2, 1]], (0, 2, 1)).copy(), along_x.z.T.copy())

        scheme_x = FirstOrderScheme(grid_x, params, neumann, case.cutoff)
        scheme_y = FirstOrderScheme(grid_y, params, neumann, case.cutoff)
        fields_x = scheme_x.fill(along_x)
        fields_y = scheme_y.fill(along_y)
        dt = scheme_x.cfl_dt(fields_x, 0.5)
        out_x = scheme_x.step(fields_x, dt)
        out_y = scheme_y.step(fields_y, dt)

        g = grid_y.ghost
        # Neumann edges are not steady; two cells on each side feel them.
        inner = (slice(None), slice(g + 2, g + grid_y.ny - 2), slice(g, g + 1))
        assert np.abs(out_y.state - fields_y.state)[inner].max() <= 1e-10
        assert np.allclose(out_y.state[[0, 2, 1]], np.transpose(out_x.state, (0, 2, 1)), atol=1e-12)


class TestOneDimensional:
    """Test a single row of cells behaves like the one-dimensional scheme"""

    @pytest.fixture
    def row_data(self, rng):
        n = 16
        return (
            rng.uniform(0.5, 1.5, n + 4),
            rng.uniform(-0.5, 0.5, n + 4),
            rng.uniform(0.0, 0.3, n + 4),
        )

    def build(self, row_data, ny, neumann):
        h, q, z = row_data
        grid = Grid2D.from_box((0.0, 1.0, 0.0, ny / 16.0), 16, ny)
        fields = FieldSet.zeros(grid)
        fields.state[0] = h[None, :]
        fields.state[1] = q[None, :]
        fields.z[...] = z[None, :]
        return grid, fill_ghosts(fields, grid, neumann)

    def test_explicit_step_matches_row_update(self, row_data, neumann):
        """Test the explicit step of an ny=1 grid equals the direct row update"""
        params = PhysParams()
        grid, fields = self.build(row_data, 1, neumann)
        dt = 0.2 * cfl_dt(fields, grid, params, 0, 1.0)
        out = explicit_step(fields, grid, params, dt, np.inf)

        h, q, z = row_data
        res = numerical_flux(
            ConservedState(h[1:-2], q[1:-2], np.zeros(17)), ConservedState(h[2:-1], q[2:-1], np.zeros(17)),
            z[1:-2], z[2:-1], grid.dx, params, np.inf
        )
        f_h, f_q, _ = res.flux
        s_dx = res.topo.s_dx
        h_new = h[2:-2] - dt / grid.dx * (f_h[1:] - f_h[:-1])
        q_new = q[2:-2] - dt / grid.dx * (f_q[1:] - f_q[:-1]) + dt * (s_dx[:-1] + s_dx[1:]) / (2.0 * grid.dx)

        rows, cols = grid.interior
        assert np.allclose(out.h[rows, cols][0], h_new, atol=1e-13)
        assert np.allclose(out.qx[rows, cols][0], q_new, atol=1e-13)
        assert np.all(out.qy[rows, cols] == 0.0)

    def test_rows_are_independent(self, row_data, neumann):
        """Test y-invariant data gives the single-row result in every row"""
        params = PhysParams(k_manning=1.0)
        grid_1, fields_1 = self.build(row_data, 1, neumann)
        grid_3, fields_3 = self.build(row_data, 3, neumann)
        dt = 0.2 * cfl_dt(fields_1, grid_1, params, 0, 1.0)
        out_1 = FirstOrderScheme(grid_1, params, neumann).step(fields_1, dt)
        out_3 = FirstOrderScheme(grid_3, params, neumann).step(fields_3, dt)
        rows_1, cols = grid_1.interior
        rows_3, _ = grid_3.interior
        for row in out_3.state[:, rows_3, cols].transpose(1, 0, 2):
            assert np.allclose(row, out_1.state[:, rows_1, cols][:, 0], atol=1e-14)


class TestConservation:
    """Test mass conservation and positivity"""

    def test_walls_conserve_mass(self):
        """Test a walled dam break keeps its mass"""
        scheme, fields = case_scheme('partial_dam_break', 20, 20)
        mass = fields.total_mass(scheme.grid)
        out = run_steps(scheme, fields, 100)
        assert out.total_mass(scheme.grid) == pytest.approx(mass, rel=1e-12)

    def test_periodic_conserves_mass(self, rng, periodic):
        """Test periodic flow keeps its mass"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 16, 16)
        scheme = FirstOrderScheme(grid, PhysParams(k_manning=0.5), periodic)
        fields = scheme.fill(make_fields(
            grid,
            h=lambda x, y: 1.0 + 0.2 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y),
            qx=0.3,
            qy=lambda x, y: 0.1 * np.sin(2 * np.pi * y),
            z=lambda x, y: 0.1 * np.cos(2 * np.pi * x),
        ))
        mass = fields.total_mass(grid)
        out = run_steps(scheme, fields, 100)
        assert out.total_mass(grid) == pytest.approx(mass, rel=1e-12)

    def test_positivity_random(self, rng, walls):
        """Test random wet-dry data stays non-negative under the CFL step"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 16, 16)
        scheme = FirstOrderScheme(grid, PhysParams(k_manning=1.0), walls, cutoff=0.5)
        fields = FieldSet.zeros(grid)
        h = rng.uniform(0.0, 2.0, grid.shape)
        h[rng.uniform(size=grid.shape) < 0.2] = 0.0
        fields.state[0] = h
        fields.state[1] = np.where(h > 0, rng.uniform(-1.0, 1.0, grid.shape), 0.0)
        fields.state[2] = np.where(h > 0, rng.uniform(-1.0, 1.0, grid.shape), 0.0)
        fields.z[...] = rng.uniform(0.0, 0.5, grid.shape)
        out = run_steps(scheme, scheme.fill(fields), 10)
        assert np.all(out.h >= 0.0)
        assert np.all(np.isfinite(out.state))


class TestFriction:
    """Test the semi-implicit friction update"""

    def test_uniform_flow(self, periodic):
        """Test a uniform flow decays by the analytic factor"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 4, 4)
        scheme = FirstOrderScheme(grid, PhysParams(k_manning=1.0), periodic)
        fields = scheme.fill(make_fields(grid, h=1.0, qx=1.0))
        out = scheme.step(fields, 1.0)
        rows, cols = grid.interior
        assert np.allclose(out.qx[rows, cols], 0.5)
        assert np.allclose(out.qy[rows, cols], 0.0)

    def test_dry_cells_stop(self, walls):
        """Test dry cells carry no discharge after the update"""
        grid = Grid2D.from_box((0.0, 1.0, 0.0, 1.0), 4, 4)
        scheme = FirstOrderScheme(grid, PhysParams(k_manning=1.0), walls)
        fields = scheme.fill(make_fields(grid, h=lambda x, y: np.where(x < 0.5, 1.0, 0.0)))
        out = scheme.step(fields, 1e-3)
        rows, cols = grid.interior
        dry = out.h[rows, cols] <= 0.0
        assert np.all(out.state[1:, rows, cols][:, dry] == 0.0)


class TestPositivityGuard:
    """Test the explicit step refuses negative heights"""

    def test_too_large_step(self, small_grid, neumann):
        """Test an oversized step raises a numerical fault"""
        fields = make_fields(
            small_grid,
            h=lambda x, y: np.where(x < 0.5, 1.0, 1e-3),
            qx=lambda x, y: np.where(x < 0.5, 0.0, 1.0),
        )
        fields = fill_ghosts(fields, small_grid, neumann)
        inc = first_order_increment(fields, small_grid, PhysParams(), np.inf)
        with pytest.raises(NumericalFault):
            apply_explicit(fields, small_grid, inc, 10.0)
