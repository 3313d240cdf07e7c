"""
Polynomial Reconstruction
Conservative least-squares reconstruction on Cartesian stencils with Gauss quadrature rules
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .exceptions import ConfigError, ReconstructionError

logger = logging.getLogger(__name__)

MAX_DEGREE = 5


def _ring(radius: int) -> List[Tuple[int, int]]:
    return [
        (sx, sy)
        for sy in range(-radius, radius + 1)
        for sx in range(-radius, radius + 1)
        if (sx, sy) != (0, 0)
    ]


def _axial(distance: int) -> List[Tuple[int, int]]:
    return [(-distance, 0), (distance, 0), (0, -distance), (0, distance)]


def stencil_offsets(d: int) -> np.ndarray:
    """
    Stencil offsets (sx, sy) for degree d, nested so lower degrees are included

    Degree 5 adds the axial cells at distance 3: on the radius-2 ring the odd
    one-dimensional powers x, x^3, x^5 only see two distinct distances.
    """
    if d == 1:
        cells = _axial(1)
    elif d == 2:
        cells = _ring(1)
    elif d == 3:
        cells = _ring(1) + _axial(2)
    elif d == 4:
        cells = _ring(2)
    elif d == 5:
        cells = _ring(2) + _axial(3)
    else:
        raise ConfigError(f"reconstruction degree must be in [1, {MAX_DEGREE}], got {d}")
    return np.array(cells, dtype=int)


def stencil_radius(d: int) -> int:
    """Chebyshev radius of the degree-d stencil"""
    if d <= 0:
        return 0
    return int(np.abs(stencil_offsets(d)).max())


def multi_indices(d: int) -> Tuple[Tuple[int, int], ...]:
    """Multi-indices alpha with 1 <= |alpha| <= d, grouped by total degree"""
    return tuple(
        (a1, total - a1)
        for total in range(1, d + 1)
        for a1 in range(total, -1, -1)
    )


def _centered_moment(p: int, h: float) -> float:
    return (1 + (-1) ** p) / (2.0 * (p + 1)) * (h / 2.0) ** p


def _offset_moment(sigma: np.ndarray, p: int, h: float) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    return ((2 * sigma + 1) ** (p + 1) - (2 * sigma - 1) ** (p + 1)) / (2.0 * (p + 1)) * (h / 2.0) ** p


def moments(alpha: Tuple[int, int], dx: float, dy: float) -> float:
    """Cell average of (x - xc)^a1 (y - yc)^a2 over a dx by dy cell"""
    a1, a2 = alpha
    return _centered_moment(a1, dx) * _centered_moment(a2, dy)


class GaussRule(NamedTuple):
    """Gauss-Legendre rule on [-1, 1] with weights normalized to sum 1"""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    cell_nodes: np.ndarray
    cell_weights: np.ndarray


@lru_cache(maxsize=None)
def gauss_nodes(d: int) -> GaussRule:
    """
    Edge and cell quadrature for degree d

    Args:
        d: Reconstruction degree in [0, 5]

    Returns:
        GaussRule with 1 + d // 2 edge nodes and the tensor cell rule
    """
    if not 0 <= d <= MAX_DEGREE:
        raise ConfigError(f"quadrature degree must be in [0, {MAX_DEGREE}], got {d}")
    n = 1 + d // 2
    nodes, weights = leggauss(n)
    weights = weights / weights.sum()
    cell_nodes = np.array([(a, b) for b in nodes for a in nodes])
    cell_weights = np.array([wa * wb for wb in weights for wa in weights])
    return GaussRule(n, nodes, weights, cell_nodes, cell_weights)


class CellPolynomial(NamedTuple):
    """Cell mean plus coefficients R^alpha; arrays carry one entry per cell"""

    mean: np.ndarray
    coeffs: np.ndarray


@dataclass(frozen=True)
class ReconstructionPlan:
    """Precomputed stencil geometry and least-squares solve operator for one degree"""

    degree: int
    dx: float
    dy: float
    stencil: np.ndarray
    alphas: Tuple[Tuple[int, int], ...]
    moments: np.ndarray
    solve_matrix: np.ndarray
    gauss: GaussRule

    @property
    def radius(self) -> int:
        return int(np.abs(self.stencil).max())

    def index_of(self, alpha: Tuple[int, int]) -> int:
        return self.alphas.index(alpha)


def build_plan(d: int, dx: float, dy: float, stencil: Optional[Sequence[Tuple[int, int]]] = None) -> ReconstructionPlan:
    """
    Assemble the geometry matrix of a stencil and factor it once

    The matrix is built in cell units and rescaled column-wise, which keeps
    the rank test independent of the mesh size.

    Args:
        d: Degree in [1, 5]
        dx: Cell width
        dy: Cell height
        stencil: Optional offset list replacing the default family

    Returns:
        ReconstructionPlan
    """
    if not 1 <= d <= MAX_DEGREE:
        raise ConfigError(f"reconstruction degree must be in [1, {MAX_DEGREE}], got {d}")
    offsets = stencil_offsets(d) if stencil is None else np.asarray(stencil, dtype=int)
    alphas = multi_indices(d)

    unit = np.empty((len(offsets), len(alphas)))
    for col, (a1, a2) in enumerate(alphas):
        unit[:, col] = (
            _offset_moment(offsets[:, 0], a1, 1.0) * _offset_moment(offsets[:, 1], a2, 1.0)
            - moments((a1, a2), 1.0, 1.0)
        )

    if len(offsets) <= len(alphas) or np.linalg.matrix_rank(unit) < len(alphas):
        logger.error(f"Rank-deficient stencil for degree {d}: {offsets.tolist()}")
        raise ReconstructionError(
            f"stencil {offsets.tolist()} does not determine a degree-{d} polynomial"
        )

    q, r = np.linalg.qr(unit)
    unit_solve = np.linalg.solve(r, q.T)
    scale = np.array([dx ** a1 * dy ** a2 for a1, a2 in alphas])

    return ReconstructionPlan(
        degree=d,
        dx=dx,
        dy=dy,
        stencil=offsets,
        alphas=alphas,
        moments=np.array([moments(a, dx, dy) for a in alphas]),
        solve_matrix=unit_solve / scale[:, None],
        gauss=gauss_nodes(d)
    )


def reconstruct(plan: ReconstructionPlan, stencil_values: np.ndarray, center: np.ndarray) -> CellPolynomial:
    """
    Least-squares coefficients from neighbor values

    Args:
        plan: Reconstruction plan
        stencil_values: Array (L, ...) of values at the stencil cells
        center: Array (...) of the cell's own values

    Returns:
        CellPolynomial with coeffs of shape (n_alpha, ...)
    """
    center = np.asarray(center, dtype=float)
    phi = np.asarray(stencil_values, dtype=float) - center
    coeffs = np.tensordot(plan.solve_matrix, phi, axes=1)
    return CellPolynomial(center, coeffs)


def gather_stencil(plan: ReconstructionPlan, field: np.ndarray, rows: slice, cols: slice) -> np.ndarray:
    """Stencil values (L, nr, nc) for the block field[rows, cols] of a padded array"""
    ny, nx = field.shape
    r0, r1, _ = rows.indices(ny)
    c0, c1, _ = cols.indices(nx)
    if (r0 - plan.radius < 0 or c0 - plan.radius < 0
            or r1 + plan.radius > ny or c1 + plan.radius > nx):
        raise ConfigError("stencil reaches outside the ghost frame")
    return np.stack([
        field[r0 + sy:r1 + sy, c0 + sx:c1 + sx]
        for sx, sy in plan.stencil
    ])


def reconstruct_field(plan: ReconstructionPlan, field: np.ndarray, rows: slice, cols: slice) -> CellPolynomial:
    """Reconstruct every cell of a block of a padded field"""
    return reconstruct(plan, gather_stencil(plan, field, rows, cols), field[rows, cols])


def _basis(plan: ReconstructionPlan, ox, oy) -> np.ndarray:
    ox = np.asarray(ox, dtype=float)
    oy = np.asarray(oy, dtype=float)
    return np.stack([
        ox ** a1 * oy ** a2 - m
        for (a1, a2), m in zip(plan.alphas, plan.moments)
    ])


def evaluate(poly: CellPolynomial, plan: Optional[ReconstructionPlan], ox, oy) -> np.ndarray:
    """
    Value of the reconstruction at offsets (ox, oy) from the cell center

    Offsets may be scalars (same point in every cell) or arrays shaped like
    the cell block.
    """
    if plan is None or poly.coeffs is None:
        return np.asarray(poly.mean, dtype=float) + 0.0 * np.asarray(ox, dtype=float)
    basis = _basis(plan, ox, oy)
    if basis.ndim == 1:
        return poly.mean + np.tensordot(basis, poly.coeffs, axes=1)
    return poly.mean + np.sum(basis * poly.coeffs, axis=0)


def gradient(poly: CellPolynomial, plan: Optional[ReconstructionPlan], ox, oy) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the reconstruction at offsets (ox, oy)"""
    mean = np.asarray(poly.mean, dtype=float)
    if plan is None or poly.coeffs is None:
        return np.zeros_like(mean), np.zeros_like(mean)
    ox = float(ox)
    oy = float(oy)
    dx_terms = np.array([a1 * ox ** (a1 - 1) * oy ** a2 if a1 else 0.0 for a1, a2 in plan.alphas])
    dy_terms = np.array([a2 * ox ** a1 * oy ** (a2 - 1) if a2 else 0.0 for a1, a2 in plan.alphas])
    return (
        np.tensordot(dx_terms, poly.coeffs, axes=1),
        np.tensordot(dy_terms, poly.coeffs, axes=1)
    )


def curvatures(poly: CellPolynomial, plan: ReconstructionPlan) -> Tuple[np.ndarray, np.ndarray]:
    """Second derivatives d_xx, d_yy of a degree-2 reconstruction (constants per cell)"""
    if plan.degree != 2:
        raise ConfigError("curvatures are defined on degree-2 reconstructions")
    return 2.0 * poly.coeffs[plan.index_of((2, 0))], 2.0 * poly.coeffs[plan.index_of((0, 2))]


def reconstruct_topography(h_poly: CellPolynomial, hz_poly: CellPolynomial) -> CellPolynomial:
    """Topography polynomial as the difference of the h+Z and h reconstructions"""
    mean = np.asarray(hz_poly.mean) - np.asarray(h_poly.mean)
    if h_poly.coeffs is None:
        return CellPolynomial(mean, None)
    return CellPolynomial(mean, hz_poly.coeffs - h_poly.coeffs)
