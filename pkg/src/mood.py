"""
MOOD Limiter
A posteriori detection of bad high-order candidates and per-cell fallback to the first-order scheme
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .core import FieldSet, Grid2D
from .reconstruction import ReconstructionPlan, curvatures, reconstruct_field
from .wb_correction import ThetaField, WellBalancedCorrection

logger = logging.getLogger(__name__)

U2_FAIL = -1
U2_INCONCLUSIVE = 0
U2_PASS = 1


@dataclass(frozen=True)
class DetectorTolerances:
    """DMP slacks and the mesh scale used by the curvature tests"""

    eps_h: float
    eps_q: float
    delta: float

    @classmethod
    def from_grid(cls, grid: Grid2D) -> 'DetectorTolerances':
        delta = grid.delta
        return cls(delta ** 3, delta ** 3, delta)


class MoodReport(NamedTuple):
    cpd: np.ndarray
    theta: ThetaField
    candidates: int


def _neighborhood(arr: np.ndarray) -> List[np.ndarray]:
    """The 3x3 window of every cell of arr[1:-1, 1:-1], center included"""
    ny, nx = arr.shape[0] - 2, arr.shape[1] - 2
    return [arr[1 + sy:1 + sy + ny, 1 + sx:1 + sx + nx] for sy in (-1, 0, 1) for sx in (-1, 0, 1)]


def _ring(arr: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Interior plus one ghost ring of a padded array"""
    g = grid.ghost
    return arr[..., g - 1:g + grid.ny + 1, g - 1:g + grid.nx + 1]


def dilate(mask: np.ndarray) -> np.ndarray:
    """Cells within Chebyshev distance 1 of a flagged cell"""
    padded = np.pad(mask, 1, mode='constant', constant_values=False)
    return np.logical_or.reduce(_neighborhood(padded))


def pad_check(candidate: FieldSet, grid: Grid2D) -> np.ndarray:
    """Physical admissibility: pass where the candidate height is non-negative"""
    rows, cols = grid.interior
    return candidate.h[rows, cols] >= 0.0


def dmp_check(candidate: np.ndarray, previous: np.ndarray, eps: float) -> np.ndarray:
    """
    Discrete maximum principle on one variable

    Args:
        candidate: Candidate values of the interior cells (ny, nx)
        previous: Previous values on the interior plus one ring (ny+2, nx+2)
        eps: Slack on both bounds

    Returns:
        Pass mask
    """
    window = np.stack(_neighborhood(previous))
    return (candidate >= window.min(axis=0) - eps) & (candidate <= window.max(axis=0) + eps)


def u2_check(curv_xx: np.ndarray, curv_yy: np.ndarray, delta: float) -> np.ndarray:
    """
    Curvature-based smoothness test

    Plateaus pass, oscillations fail, smooth extrema pass, anything else is
    inconclusive.

    Args:
        curv_xx: d_xx of degree-2 reconstructions on the interior plus one ring
        curv_yy: d_yy likewise
        delta: Mesh scale

    Returns:
        Per-cell outcome in {U2_PASS, U2_FAIL, U2_INCONCLUSIVE}
    """
    wx = np.stack(_neighborhood(curv_xx))
    wy = np.stack(_neighborhood(curv_yy))
    x_min, x_max = wx.min(axis=0), wx.max(axis=0)
    y_min, y_max = wy.min(axis=0), wy.max(axis=0)

    plateau = np.maximum.reduce([np.abs(x_min), np.abs(x_max), np.abs(y_min), np.abs(y_max)]) <= delta
    oscillation = (x_min * x_max < -delta) | (y_min * y_max < -delta)

    def ratio(lo, hi):
        small = np.minimum(np.abs(lo), np.abs(hi))
        large = np.maximum(np.abs(lo), np.abs(hi))
        return np.where(large > 0, small / np.where(large > 0, large, 1.0), 1.0)

    smooth = (ratio(x_min, x_max) >= 0.5) & (ratio(y_min, y_max) >= 0.5)
    return np.select(
        [plateau, oscillation, smooth],
        [U2_PASS, U2_FAIL, U2_PASS],
        default=U2_INCONCLUSIVE
    )


def _monitored(fields: FieldSet) -> Dict[str, np.ndarray]:
    return {'eta': fields.h + fields.z, 'qx': fields.qx, 'qy': fields.qy}


def detector_chain(
    candidate: FieldSet,
    previous: FieldSet,
    cpd: np.ndarray,
    grid: Grid2D,
    plan2: ReconstructionPlan,
    tol: DetectorTolerances
) -> np.ndarray:
    """
    Reject mask for the candidate

    A cell is rejected if its height is negative, or if some monitored
    variable violates the maximum principle without a smooth-extremum
    excuse. CPD-0 cells are always accepted.

    Args:
        candidate: Candidate fields with ghosts filled
        previous: Stage input fields with ghosts filled
        cpd: Per-cell degree map
        grid: Mesh
        plan2: Degree-2 plan for the curvature reconstructions
        tol: Detector tolerances

    Returns:
        Boolean reject mask over interior cells
    """
    rows, cols = grid.interior
    reject = ~pad_check(candidate, grid)
    g = grid.ghost
    region = (slice(g - 1, g + grid.ny + 1), slice(g - 1, g + grid.nx + 1))
    cand_vars = _monitored(candidate)
    prev_vars = _monitored(previous)
    for name, values in cand_vars.items():
        eps = tol.eps_h if name == 'eta' else tol.eps_q
        dmp_fail = ~dmp_check(values[rows, cols], _ring(prev_vars[name], grid), eps)
        if not (dmp_fail & (cpd > 0)).any():
            continue
        poly = reconstruct_field(plan2, values, *region)
        cxx, cyy = curvatures(poly, plan2)
        reject |= dmp_fail & (u2_check(cxx, cyy, tol.delta) == U2_FAIL)
    return reject & (cpd > 0)


def mood_loop(
    fields: FieldSet,
    correction: WellBalancedCorrection,
    dt: float,
    tol: DetectorTolerances,
    limiting: bool = True
) -> Tuple[FieldSet, MoodReport]:
    """
    One limited application of the blended scheme

    Args:
        fields: Stage input with ghosts filled
        correction: Blended scheme
        dt: Stage time step, fixed for the loop
        tol: Detector tolerances
        limiting: False computes the candidate once with CPD = d on every cell

    Returns:
        Accepted fields and the final CPD map, weights and candidate count
    """
    fo, ho = correction.fo, correction.ho
    grid = fo.grid
    rows, cols = grid.interior
    theta = correction.theta(fields)
    cpd = np.full((grid.ny, grid.nx), ho.degree, dtype=int)

    if limiting and ho.degree > 0:
        cpd[(theta.theta_x == 0) & (theta.theta_y == 0)] = 0
        cpd[ho.negative_cells(fields, cpd)] = 0

    candidate = correction.step(fields, dt, cpd, theta)
    candidates = 1
    if not limiting or ho.degree == 0:
        return candidate, MoodReport(cpd, theta, candidates)

    plan2 = ho.plans[2]
    while True:
        reject = detector_chain(candidate, fields, cpd, grid, plan2, tol)
        if not reject.any():
            break
        discard = dilate(reject)
        cpd[discard] = 0
        logger.debug(f"MOOD pass {candidates}: {int(reject.sum())} rejected, {int(discard.sum())} recomputed")
        recomputed = correction.step(fields, dt, cpd, theta)
        candidates += 1
        candidate.state[:, rows, cols] = np.where(
            discard, recomputed.state[:, rows, cols], candidate.state[:, rows, cols]
        )
        candidate = fo.fill(candidate)
    return candidate, MoodReport(cpd, theta, candidates)


class MoodLimiter:
    """The limited one-step map used by each Runge-Kutta stage"""

    def __init__(self, correction: WellBalancedCorrection, tol: Optional[DetectorTolerances] = None, enabled: bool = True):
        """
        Initialize the limiter

        Args:
            correction: Blended scheme
            tol: Detector tolerances, derived from the grid by default
            enabled: False disables a posteriori limiting
        """
        self.correction = correction
        self.tol = tol or DetectorTolerances.from_grid(correction.fo.grid)
        self.enabled = enabled
        self.last_report: Optional[MoodReport] = None

    def apply(self, fields: FieldSet, dt: float) -> FieldSet:
        result, report = mood_loop(fields, self.correction, dt, self.tol, self.enabled)
        self.last_report = report
        return result
