"""
Snapshot Output
CSV field snapshots, JSON run summaries and legacy VTK export
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from .core import FieldSet, Grid2D

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ['x', 'y', 'h', 'qx', 'qy', 'z', 'eta', 'theta_x', 'theta_y', 'cpd']
FLOAT_FORMAT = '%.17g'


def snapshot_frame(
    fields: FieldSet,
    grid: Grid2D,
    theta_x: Optional[np.ndarray] = None,
    theta_y: Optional[np.ndarray] = None,
    cpd: Optional[np.ndarray] = None
) -> pd.DataFrame:
    """Interior cells in row-major order as a DataFrame with the snapshot columns"""
    rows, cols = grid.interior
    xc, yc = grid.interior_centers()
    shape = xc.shape
    h = fields.h[rows, cols]
    z = fields.z[rows, cols]
    data = {
        'x': xc,
        'y': yc,
        'h': h,
        'qx': fields.qx[rows, cols],
        'qy': fields.qy[rows, cols],
        'z': z,
        'eta': h + z,
        'theta_x': np.zeros(shape) if theta_x is None else theta_x,
        'theta_y': np.zeros(shape) if theta_y is None else theta_y,
        'cpd': np.zeros(shape, dtype=int) if cpd is None else np.asarray(cpd, dtype=int),
    }
    return pd.DataFrame({name: np.ravel(values) for name, values in data.items()}, columns=SNAPSHOT_COLUMNS)


def write_snapshot(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote snapshot {path}")
    return path


def read_snapshot(path: Union[str, Path]) -> pd.DataFrame:
    """Read a snapshot back with exact double precision"""
    return pd.read_csv(path, float_precision='round_trip')


def fields_from_snapshot(frame: pd.DataFrame, grid: Grid2D, time: float = 0.0) -> FieldSet:
    """Interior state and topography of a snapshot placed into a fresh FieldSet"""
    rows, cols = grid.interior
    fields = FieldSet.zeros(grid, time)
    shape = (grid.ny, grid.nx)
    for comp, name in enumerate(('h', 'qx', 'qy')):
        fields.state[comp, rows, cols] = frame[name].to_numpy().reshape(shape)
    fields.z[rows, cols] = frame['z'].to_numpy().reshape(shape)
    return fields


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def write_summary(path: Union[str, Path], summary: Dict[str, Any]) -> Path:
    """Run summary as JSON; non-finite floats are written as strings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(summary), indent=2))
    logger.info(f"Wrote summary {path}")
    return path


def write_vtk(path: Union[str, Path], frame: pd.DataFrame, grid: Grid2D, title: str = 'swell snapshot') -> Path:
    """
    Legacy ASCII VTK structured-points file with cell data

    Args:
        path: Output file
        frame: Snapshot frame in row-major cell order
        grid: Mesh the frame was taken on
        title: Header line

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        '# vtk DataFile Version 3.0',
        title,
        'ASCII',
        'DATASET STRUCTURED_POINTS',
        f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} 1",
        f"ORIGIN {grid.origin[0]!r} {grid.origin[1]!r} 0",
        f"SPACING {grid.dx!r} {grid.dy!r} 1",
        f"CELL_DATA {grid.nx * grid.ny}",
    ]
    for name in SNAPSHOT_COLUMNS[2:]:
        kind = 'int' if name == 'cpd' else 'double'
        lines.append(f"SCALARS {name} {kind} 1")
        lines.append('LOOKUP_TABLE default')
        fmt = '%d' if name == 'cpd' else FLOAT_FORMAT
        lines.extend(fmt % v for v in frame[name].to_numpy())
    path.write_text('\n'.join(lines) + '\n')
    logger.info(f"Wrote VTK file {path}")
    return path
