"""
Diagnostics
Error norms against reference solutions, convergence orders and dam-break wave features
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .core import H_DRY, AnalyticHandle, FieldSet, Grid2D, PhysParams
from .wb_correction import psi_fric, psi_topo

logger = logging.getLogger(__name__)

NORMS = ('L1', 'L2', 'Linf')


class Norms(NamedTuple):
    l1: float
    l2: float
    linf: float


@dataclass
class ErrorReport:
    """Per-variable L1, L2 and Linf errors of one run"""

    errors: Dict[str, Norms] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        return {name: dict(zip(NORMS, values)) for name, values in self.errors.items()}

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame.from_dict(self.as_dict(), orient='index', columns=list(NORMS))
        frame.index.name = 'variable'
        return frame


def norms(error: np.ndarray) -> Norms:
    """Discrete norms of a per-cell error, averaged over the cell count"""
    err = np.abs(np.asarray(error, dtype=float)).ravel()
    if err.size == 0:
        return Norms(0.0, 0.0, 0.0)
    return Norms(float(np.mean(err)), float(np.sqrt(np.mean(err ** 2))), float(np.max(err)))


def _variable(name: str, h, qx, qy, z, x, params: PhysParams) -> np.ndarray:
    if name == 'h':
        return h
    if name == 'eta':
        return h + z
    if name == 'qx':
        return qx
    if name == 'qy':
        return qy
    if name == 'psi_topo':
        return psi_topo(h, qx, z, params.g)
    if name == 'psi_fric':
        return psi_fric(h, qx, x, params)
    raise KeyError(name)


def error_norms(
    fields: FieldSet,
    handle: AnalyticHandle,
    grid: Grid2D,
    params: PhysParams,
    variables: Sequence[str] = ('h', 'eta', 'q'),
    t: Optional[float] = None
) -> ErrorReport:
    """
    Errors of the interior cells against the reference cell averages

    'q' measures the discharge vector error; other names compare scalar
    fields: h, eta (= h + Z), qx, qy, psi_topo, psi_fric.

    Args:
        fields: Numerical solution
        handle: Reference cell averages at cell centers
        grid: Mesh
        params: Physical parameters
        variables: Variables to report
        t: Evaluation time, the fields' time by default

    Returns:
        ErrorReport
    """
    rows, cols = grid.interior
    xc, yc = grid.interior_centers()
    t = fields.time if t is None else t
    exact, z_ex = handle(xc, yc, t)
    num = [fields.state[c, rows, cols] for c in range(3)]
    ref = [np.broadcast_to(np.asarray(v, dtype=float), xc.shape) for v in exact]
    z = fields.z[rows, cols]
    z_ex = np.broadcast_to(np.asarray(z_ex, dtype=float), xc.shape)

    report = ErrorReport()
    for name in variables:
        if name == 'q':
            err = np.hypot(num[1] - ref[1], num[2] - ref[2])
        else:
            err = _variable(name, *num, z, xc, params) - _variable(name, *ref, z_ex, xc, params)
        report.errors[name] = norms(err)
    return report


def convergence_table(results: Sequence[Tuple[int, int, ErrorReport]]) -> pd.DataFrame:
    """
    Errors and observed orders over a mesh sequence

    Orders use the ratio of consecutive errors against the ratio of cell
    counts along x, so halving the mesh size gives log2 of the error ratio.

    Args:
        results: (nx, ny, report) per mesh, coarse to fine

    Returns:
        DataFrame with one row per mesh and columns '<var>_<norm>' and
        '<var>_<norm>_order'
    """
    rows: List[Dict[str, float]] = []
    previous = None
    for nx, ny, report in results:
        row: Dict[str, float] = {'nx': nx, 'ny': ny}
        for name, values in report.errors.items():
            for norm, value in zip(NORMS, values):
                key = f"{name}_{norm}"
                row[key] = value
                order = float('nan')
                if previous is not None:
                    prev_n, prev_report = previous
                    prev_value = dict(zip(NORMS, prev_report.errors[name]))[norm]
                    if value > 0 and prev_value > 0 and nx != prev_n:
                        order = math.log(prev_value / value) / math.log(nx / prev_n)
                row[f"{key}_order"] = order
        rows.append(row)
        previous = (nx, report)
    return pd.DataFrame(rows)


# Wave feature extraction for the partial dam break

FEATURE_JUMP = 0.1
VORTEX_LEVEL = 5.5
VORTEX_MIN_SPEED = 0.1
# Box (x0, x1, y0, y1) downstream of the upper dam wing
LEE_BOX = (5.0, 50.0, 30.0, 70.0)


@dataclass(frozen=True)
class DamBreakFeatures:
    """Shock, rarefaction and lee-vortex measurements along and near y = 0"""

    shock_position: float
    shock_amplitude: float
    rarefaction_head: float
    rarefaction_size: float
    rarefaction_amplitude: float
    vortex_depth: float
    vortex_size: float

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def dam_break_features(
    fields: FieldSet,
    grid: Grid2D,
    reservoir: float = 10.0,
    tailwater: float = 5.0,
    dam_x: float = 5.0
) -> DamBreakFeatures:
    """
    Threshold-based wave features of a partial dam break

    Args:
        fields: Solution
        grid: Mesh
        reservoir: Initial free surface upstream of the dam
        tailwater: Initial free surface downstream
        dam_x: Half thickness of the dam along x

    Returns:
        DamBreakFeatures; NaN where a feature is absent
    """
    rows, cols = grid.interior
    xc, yc = grid.interior_centers()
    h = fields.h[rows, cols]
    eta = h + fields.z[rows, cols]
    j0 = int(np.argmin(np.abs(yc[:, 0])))
    x_line, eta_line = xc[j0], eta[j0]

    shocked = np.nonzero(eta_line - tailwater > FEATURE_JUMP)[0]
    shock_position = shock_amplitude = float('nan')
    if shocked.size:
        last = shocked[-1]
        shock_position = float(x_line[last])
        shock_amplitude = float(eta_line[max(last - 2, 0)] - tailwater)

    upstream = x_line <= -dam_x
    drawn = np.nonzero(upstream & (reservoir - eta_line > FEATURE_JUMP))[0]
    head = size = amplitude = float('nan')
    if drawn.size:
        head = float(x_line[drawn[0]])
        tail = drawn[-1]
        size = float(x_line[tail] - head)
        amplitude = float(reservoir - eta_line[tail])

    speed = np.hypot(fields.qx[rows, cols], fields.qy[rows, cols]) / np.where(h > H_DRY, h, np.inf)
    x0, x1, y0, y1 = LEE_BOX
    lee = (xc > x0) & (xc < x1) & (yc > y0) & (yc < y1)
    moving = lee & (speed > VORTEX_MIN_SPEED)
    depth = vortex_size = float('nan')
    if moving.any():
        depth = float(eta[moving].min())
        vortex_size = float(np.count_nonzero(moving & (eta < VORTEX_LEVEL)) * grid.dx * grid.dy)

    features = DamBreakFeatures(shock_position, shock_amplitude, head, size, amplitude, depth, vortex_size)
    logger.info(f"Dam-break features: shock at x={shock_position:.4g}, rarefaction head at x={head:.4g}")
    return features
