"""
Tests for snapshot, summary and VTK output
"""
import json

import numpy as np

from src.core import Grid2D
from src.snapshots import (
    SNAPSHOT_COLUMNS, fields_from_snapshot, read_snapshot, snapshot_frame, write_snapshot, write_summary, write_vtk,
)
from tests.conftest import make_fields


def sample(rng):
    grid = Grid2D.from_box((0.0, 1.0, -1.0, 1.0), 5, 4)
    fields = make_fields(
        grid,
        h=lambda x, y: 1.0 + rng.uniform(size=x.shape),
        qx=lambda x, y: rng.normal(size=x.shape),
        qy=lambda x, y: rng.normal(size=x.shape),
        z=lambda x, y: 0.1 * x * y,
    )
    return grid, fields


class TestSnapshot:
    """Test CSV snapshots"""

    def test_columns(self, rng):
        """Test the frame layout in row-major order"""
        grid, fields = sample(rng)
        frame = snapshot_frame(fields, grid, cpd=np.full((4, 5), 2))
        assert list(frame.columns) == SNAPSHOT_COLUMNS
        assert len(frame) == 20
        assert frame['x'].iloc[1] > frame['x'].iloc[0]
        assert frame['y'].iloc[5] > frame['y'].iloc[0]
        assert np.allclose(frame['eta'], frame['h'] + frame['z'])
        assert (frame['cpd'] == 2).all()

    def test_round_trip(self, rng, tmp_path):
        """Test a written snapshot reloads bit for bit"""
        grid, fields = sample(rng)
        path = write_snapshot(tmp_path / 'out' / 'snap.csv', snapshot_frame(fields, grid))
        restored = fields_from_snapshot(read_snapshot(path), grid)
        rows, cols = grid.interior
        assert np.array_equal(restored.state[:, rows, cols], fields.state[:, rows, cols])
        assert np.array_equal(restored.z[rows, cols], fields.z[rows, cols])


class TestSummary:
    """Test JSON summaries"""

    def test_non_finite(self, tmp_path):
        """Test numpy scalars and non-finite values are written"""
        path = write_summary(tmp_path / 'summary.json', {
            'steps': np.int64(12),
            'error': {'h': {'L1': np.float64(1e-3), 'order': float('nan')}},
            'mesh': (10, 20),
        })
        data = json.loads(path.read_text())
        assert data['steps'] == 12
        assert data['error']['h']['L1'] == 1e-3
        assert data['error']['h']['order'] == 'nan'
        assert data['mesh'] == [10, 20]


class TestVtk:
    """Test legacy VTK export"""

    def test_header(self, rng, tmp_path):
        """Test the structured-points header and data blocks"""
        grid, fields = sample(rng)
        path = write_vtk(tmp_path / 'snap.vtk', snapshot_frame(fields, grid), grid)
        lines = path.read_text().splitlines()
        assert lines[0] == '# vtk DataFile Version 3.0'
        assert 'DIMENSIONS 6 5 1' in lines
        assert 'CELL_DATA 20' in lines
        assert 'SCALARS cpd int 1' in lines
        assert len(lines) == 8 + 8 * (2 + 20)
