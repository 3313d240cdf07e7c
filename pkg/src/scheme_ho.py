"""
High-Order Scheme
Gauss-quadrature fluxes and sources on reconstructed polynomials, and SSP Runge-Kutta stepping
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, TypeVar

import numpy as np

from .core import H_DRY, ConservedState, FieldSet, Grid2D, PhysParams
from .reconstruction import (
    CellPolynomial,
    ReconstructionPlan,
    build_plan,
    evaluate,
    gauss_nodes,
    gradient,
    reconstruct_field,
    reconstruct_topography,
)
from .riemann1d import numerical_flux
from .scheme_fo import SpatialIncrement

logger = logging.getLogger(__name__)

T = TypeVar('T')


def build_plans(degree: int, dx: float, dy: float) -> Dict[int, ReconstructionPlan]:
    """Plans for the scheme degree and for the degree-2 curvature reconstructions"""
    plans = {}
    if degree >= 1:
        plans[degree] = build_plan(degree, dx, dy)
    if degree >= 1 and 2 not in plans:
        plans[2] = build_plan(2, dx, dy)
    return plans


class _Reconstructions:
    """Reconstructions of h, qx, qy and h+Z on the interior plus one ghost ring"""

    def __init__(self, fields: FieldSet, grid: Grid2D, plan: Optional[ReconstructionPlan], cpd: np.ndarray):
        g = grid.ghost
        self.plan = plan
        rows = slice(g - 1, g + grid.ny + 1)
        cols = slice(g - 1, g + grid.nx + 1)
        arrays = (fields.h, fields.qx, fields.qy, fields.h + fields.z)
        if plan is None:
            self.polys = [CellPolynomial(a[rows, cols], None) for a in arrays]
        else:
            keep = np.pad(cpd, 1, mode='edge') > 0
            self.polys = []
            for arr in arrays:
                poly = reconstruct_field(plan, arr, rows, cols)
                self.polys.append(CellPolynomial(poly.mean, np.where(keep, poly.coeffs, 0.0)))
        self.z_poly = reconstruct_topography(self.polys[0], self.polys[3])

    def interior(self) -> '_Reconstructions':
        sub = object.__new__(_Reconstructions)
        sub.plan = self.plan
        trim = (slice(1, -1), slice(1, -1))
        sub.polys = [
            CellPolynomial(p.mean[trim], None if p.coeffs is None else p.coeffs[(slice(None),) + trim])
            for p in self.polys
        ]
        sub.z_poly = reconstruct_topography(sub.polys[0], sub.polys[3])
        return sub

    def point(self, ox, oy) -> Tuple[ConservedState, np.ndarray, np.ndarray]:
        """State, topography and negativity mask at an offset from every cell center"""
        h_raw = evaluate(self.polys[0], self.plan, ox, oy)
        qx = evaluate(self.polys[1], self.plan, ox, oy)
        qy = evaluate(self.polys[2], self.plan, ox, oy)
        z = evaluate(self.polys[3], self.plan, ox, oy) - h_raw
        negative = h_raw < 0.0
        h = np.where(negative, 0.0, h_raw)
        qx = np.where(negative, 0.0, qx)
        qy = np.where(negative, 0.0, qy)
        return ConservedState(h, qx, qy), z, negative


def ho_spatial_operator(
    fields: FieldSet,
    grid: Grid2D,
    plan: Optional[ReconstructionPlan],
    params: PhysParams,
    c: float,
    d: int,
    cpd: np.ndarray
) -> SpatialIncrement:
    """
    High-order rates for every interior cell

    Interface fluxes are Gauss sums of the two-state solver applied to the
    side reconstructions; sources are tensor Gauss sums over the cell. Cells
    with CPD 0 use the interface average of the topography source instead.

    Args:
        fields: Fields with ghosts filled
        grid: Mesh
        plan: Plan for degree d (None when d = 0)
        params: Physical parameters
        c: Height cutoff constant
        d: Scheme degree
        cpd: Per-cell degree map (ny, nx), values in {0, d}

    Returns:
        SpatialIncrement; bad_cells flags negative reconstructed heights
    """
    rule = gauss_nodes(d)
    rec = _Reconstructions(fields, grid, plan if d > 0 else None, cpd)
    hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
    ny, nx = grid.ny, grid.nx
    bad = np.zeros((ny, nx), dtype=bool)

    fx = np.zeros((3, ny, nx + 1))
    fy = np.zeros((3, ny + 1, nx))
    sx = np.zeros((ny, nx + 1))
    sy = np.zeros((ny + 1, nx))
    for node, weight in zip(rule.nodes, rule.weights):
        east, z_e, neg_e = rec.point(hx, node * hy)
        west, z_w, neg_w = rec.point(-hx, node * hy)
        bad |= neg_e[1:-1, 1:-1] | neg_w[1:-1, 1:-1]
        res = numerical_flux(
            ConservedState(*(v[1:-1, :-1] for v in east)),
            ConservedState(*(v[1:-1, 1:] for v in west)),
            z_e[1:-1, :-1], z_w[1:-1, 1:], grid.dx, params, c, d
        )
        fx += weight * np.stack(res.flux)
        sx += weight * res.topo.s_dx

        north, z_n, neg_n = rec.point(node * hx, hy)
        south, z_s, neg_s = rec.point(node * hx, -hy)
        bad |= neg_n[1:-1, 1:-1] | neg_s[1:-1, 1:-1]
        res = numerical_flux(
            ConservedState(north.h[:-1, 1:-1], north.qy[:-1, 1:-1], north.qx[:-1, 1:-1]),
            ConservedState(south.h[1:, 1:-1], south.qy[1:, 1:-1], south.qx[1:, 1:-1]),
            z_n[:-1, 1:-1], z_s[1:, 1:-1], grid.dy, params, c, d
        )
        f_h, f_n, f_t = res.flux
        fy += weight * np.stack((f_h, f_t, f_n))
        sy += weight * res.topo.s_dx

    inner = rec.interior()
    topo = np.zeros((2, ny, nx))
    fric = np.zeros((2, ny, nx))
    k, eta, g = params.k_manning, params.eta, params.g
    for (a, b), weight in zip(rule.cell_nodes, rule.cell_weights):
        ox, oy = a * hx, b * hy
        state, _, negative = inner.point(ox, oy)
        bad |= negative
        dzx, dzy = gradient(inner.z_poly, inner.plan, ox, oy)
        topo[0] += weight * (-g * state.h * dzx)
        topo[1] += weight * (-g * state.h * dzy)
        if k > 0:
            wet = state.h > H_DRY
            h_safe = np.where(wet, state.h, 1.0)
            factor = np.where(wet, -k * np.hypot(state.qx, state.qy) * h_safe ** (-eta), 0.0)
            fric[0] += weight * factor * state.qx
            fric[1] += weight * factor * state.qy

    flat = cpd <= 0
    topo[0] = np.where(flat, (sx[:, :-1] + sx[:, 1:]) / (2.0 * grid.dx), topo[0])
    topo[1] = np.where(flat, (sy[:-1, :] + sy[1:, :]) / (2.0 * grid.dy), topo[1])

    div_x = -(fx[:, :, 1:] - fx[:, :, :-1]) / grid.dx
    div_y = -(fy[:, 1:, :] - fy[:, :-1, :]) / grid.dy
    return SpatialIncrement(div_x, div_y, topo, fric, bad & (cpd > 0))


def negative_reconstruction(
    fields: FieldSet,
    grid: Grid2D,
    plan: ReconstructionPlan,
    cpd: np.ndarray
) -> np.ndarray:
    """Cells whose degree-d height reconstruction is negative at an edge or cell Gauss point"""
    rec = _Reconstructions(fields, grid, plan, cpd).interior()
    rule = plan.gauss
    hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
    points = [(hx, n * hy) for n in rule.nodes] + [(-hx, n * hy) for n in rule.nodes]
    points += [(n * hx, hy) for n in rule.nodes] + [(n * hx, -hy) for n in rule.nodes]
    points += [(a * hx, b * hy) for a, b in rule.cell_nodes]
    bad = np.zeros(cpd.shape, dtype=bool)
    for ox, oy in points:
        bad |= evaluate(rec.polys[0], plan, ox, oy) < 0.0
    return bad & (cpd > 0)


@dataclass(frozen=True)
class SsprkStage:
    """
    One operator application followed by a convex combination

    source indexes the stage values u; combination terms are
    (weight, 'u' or 'y', index) where y holds the operator outputs.
    """

    source: int
    dt_fraction: float
    combination: Tuple[Tuple[float, str, int], ...]


@dataclass(frozen=True)
class SsprkMethod:
    label: str
    stages: Tuple[SsprkStage, ...]


_C54 = 0.368410593050371 / 0.555629506348765

SSPRK22 = SsprkMethod('SSPRK22', (
    SsprkStage(0, 1.0, ((1.0, 'y', 0),)),
    SsprkStage(1, 1.0, ((0.5, 'u', 0), (0.5, 'y', 1))),
))

SSPRK33 = SsprkMethod('SSPRK33', (
    SsprkStage(0, 1.0, ((1.0, 'y', 0),)),
    SsprkStage(1, 1.0, ((0.75, 'u', 0), (0.25, 'y', 1))),
    SsprkStage(2, 1.0, ((1.0 / 3.0, 'u', 0), (2.0 / 3.0, 'y', 2))),
))

# Five-stage fourth-order SSP tableau written with forward-Euler substeps of
# equal length; the last stage reuses the fourth operator output.
SSPRK54 = SsprkMethod('SSPRK54', (
    SsprkStage(0, 0.391752226571890, ((1.0, 'y', 0),)),
    SsprkStage(1, _C54, ((0.444370493651235, 'u', 0), (0.555629506348765, 'y', 1))),
    SsprkStage(2, _C54, ((0.620101851488403, 'u', 0), (0.379898148511597, 'y', 2))),
    SsprkStage(3, _C54, ((0.178079954393132, 'u', 0), (0.821920045606868, 'y', 3))),
    SsprkStage(4, 0.226007483236906 / 0.386708617503269, (
        (0.517231671970585, 'u', 2), (0.096059710526147, 'y', 3), (0.386708617503269, 'y', 4)
    )),
))


def ssprk_select(d: int) -> SsprkMethod:
    """Time integrator matching the spatial degree"""
    if d <= 1:
        return SSPRK22
    if d == 2:
        return SSPRK33
    return SSPRK54


def ssprk_step(method: SsprkMethod, apply_once: Callable[[T, float], T], w: T, dt: float) -> T:
    """
    Advance one SSP Runge-Kutta step

    Args:
        method: Stage table
        apply_once: One-step map H(state, dt_stage)
        w: State at time n; any type supporting scalar products and sums
        dt: Full time step

    Returns:
        State at time n+1
    """
    u = [w]
    y = []
    for stage in method.stages:
        y.append(apply_once(u[stage.source], stage.dt_fraction * dt))
        terms = [weight * (u if seq == 'u' else y)[idx] for weight, seq, idx in stage.combination]
        acc = terms[0]
        for term in terms[1:]:
            acc = acc + term
        u.append(acc)
    return u[-1]


class HighOrderScheme:
    """High-order spatial operator bound to a grid and degree"""

    def __init__(self, grid: Grid2D, params: PhysParams, degree: int, cutoff: float = np.inf):
        """
        Initialize the scheme

        Args:
            grid: Mesh
            params: Physical parameters
            degree: Reconstruction degree d
            cutoff: Height cutoff constant C
        """
        self.grid = grid
        self.params = params
        self.degree = degree
        self.cutoff = cutoff
        self.plans = build_plans(degree, grid.dx, grid.dy)
        self.method = ssprk_select(degree)
        logger.info(f"High-order scheme: degree {degree}, {self.method.label}")

    @property
    def plan(self) -> Optional[ReconstructionPlan]:
        return self.plans.get(self.degree) if self.degree > 0 else None

    def spatial_operator(self, fields: FieldSet, cpd: np.ndarray) -> SpatialIncrement:
        return ho_spatial_operator(fields, self.grid, self.plan, self.params, self.cutoff, self.degree, cpd)

    def negative_cells(self, fields: FieldSet, cpd: np.ndarray) -> np.ndarray:
        if self.plan is None:
            return np.zeros(cpd.shape, dtype=bool)
        return negative_reconstruction(fields, self.grid, self.plan, cpd)
