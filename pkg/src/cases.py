"""
Benchmark Cases
Initial data, analytic solutions and boundary sets of the benchmark library
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .core import (
    AnalyticHandle,
    BoundaryCondition,
    BoundaryKind,
    BoundarySpec,
    ConservedState,
    FieldSet,
    Grid2D,
    PhysParams,
)
from .exceptions import ConfigError, RootFindError
from .reconstruction import gauss_nodes
from .wb_correction import psi_fric, psi_topo

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 200

PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
# (xc, yc, dx, dy, degree, params) -> cell averages of (state, z)
CellData = Callable[[np.ndarray, np.ndarray, float, float, int, PhysParams], Tuple[ConservedState, np.ndarray]]


def cell_average(func: PointFunction, xc, yc, dx: float, dy: float, degree: int) -> np.ndarray:
    """
    Cell averages of a pointwise function with the tensor Gauss rule of the degree

    Args:
        func: Vectorized f(x, y)
        xc: Cell-center x coordinates
        yc: Cell-center y coordinates
        dx: Cell width
        dy: Cell height
        degree: Reconstruction degree selecting the rule

    Returns:
        Array shaped like xc
    """
    rule = gauss_nodes(degree)
    xc = np.asarray(xc, dtype=float)
    yc = np.asarray(yc, dtype=float)
    total = np.zeros(np.broadcast(xc, yc).shape)
    for (a, b), w in zip(rule.cell_nodes, rule.cell_weights):
        total = total + w * func(xc + 0.5 * a * dx, yc + 0.5 * b * dy)
    return total


def bisect(residual: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float = ROOT_TOL, max_iter: int = ROOT_MAX_ITER) -> np.ndarray:
    """
    Elementwise bracketed bisection

    Args:
        residual: Vectorized function whose zero is sought
        lo: Lower bracket (scalar or array)
        hi: Upper bracket
        tol: Residual tolerance
        max_iter: Iteration cap

    Returns:
        Root array

    Raises:
        RootFindError: If a bracket has no sign change or the tolerance is not met
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    f_lo = residual(lo)
    f_hi = residual(hi)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    f_lo = np.broadcast_to(f_lo, lo.shape).copy()
    no_change = np.sign(f_lo) * np.sign(np.broadcast_to(f_hi, lo.shape)) > 0
    if no_change.any():
        logger.error(f"Root bracket without sign change in {int(no_change.sum())} entries")
        raise RootFindError(f"no sign change in [{lo.flat[0]:.3g}, {hi.flat[0]:.3g}] for {int(no_change.sum())} entries")

    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if np.all(np.abs(f_mid) <= tol):
            return mid
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)

    worst = float(np.max(np.abs(residual(mid))))
    if worst > tol:
        logger.error(f"Bisection stopped after {max_iter} iterations with residual {worst:.3e}")
        raise RootFindError(f"bisection did not reach residual {tol:g} (got {worst:.3e})")
    return mid


def lake_at_rest(topography: PointFunction, level: PointFunction) -> CellData:
    """Discrete lake at rest: averaged topography, height from the level at the cell center"""

    def data(xc, yc, dx, dy, degree, params):
        z = cell_average(topography, xc, yc, dx, dy, degree)
        h = np.maximum(level(xc, yc) - z, 0.0)
        zero = np.zeros_like(h)
        return ConservedState(h, zero, zero.copy()), z

    return data


def averaged(profile: Callable[[np.ndarray, np.ndarray, PhysParams], Tuple[np.ndarray, ...]]) -> CellData:
    """Cell data from pointwise (h, qx, qy, z) averaged with the degree's rule"""

    def data(xc, yc, dx, dy, degree, params):
        values = cell_average(lambda x, y: np.stack(profile(x, y, params)), xc, yc, dx, dy, degree)
        return ConservedState(*values[:3]), values[3]

    return data


# Lake at rest with an emerged cone

def _cone(x, y):
    return np.sqrt(x ** 2 + y ** 2)


# Subcritical flow over a bump

GOUTAL_DISCHARGE = 4.42
GOUTAL_LEVEL = 2.0


def _bump(x, y):
    return np.maximum(0.2 - 0.05 * (x - 10.0) ** 2, 0.0) + 0.0 * y


def goutal_steady(xc, yc, dx, dy, degree, params):
    """Subcritical moving steady state with the outlet height as reference"""
    g = params.g
    q = GOUTAL_DISCHARGE
    z = cell_average(_bump, xc, yc, dx, dy, degree)
    level = q ** 2 / (2.0 * GOUTAL_LEVEL ** 2) + g * GOUTAL_LEVEL
    h_crit = (q ** 2 / g) ** (1.0 / 3.0)
    h = bisect(lambda h: psi_topo(h, q, z, g) - level, h_crit * np.ones_like(z), 10.0)
    return ConservedState(h, np.full_like(h, q), np.zeros_like(h)), z


def goutal_boundary(xc, yc, dx, dy, degree, params):
    z = cell_average(_bump, xc, yc, dx, dy, degree)
    h = np.full_like(z, GOUTAL_LEVEL)
    return ConservedState(h, np.full_like(z, GOUTAL_DISCHARGE), np.zeros_like(z)), z


# Friction steady state over a flat bottom

FRICTION_DISCHARGE = -0.5
FRICTION_PSI = 0.02


def friction_steady(xc, yc, dx, dy, degree, params):
    """Height solving the friction functional at each cell-center abscissa"""
    x = np.asarray(xc, dtype=float)
    q = np.full_like(x, FRICTION_DISCHARGE)
    h = bisect(lambda h: psi_fric(h, q, x, params) - FRICTION_PSI, np.full_like(x, 1e-8), 10.0)
    return ConservedState(h, q, np.zeros_like(x)), np.zeros_like(x)


def friction_perturbation(xc, yc, state: ConservedState) -> ConservedState:
    box = (xc > 3.0 / 7.0) & (xc < 4.0 / 7.0)
    return ConservedState(
        np.where(box, state.h + 0.05, state.h),
        np.where(box, state.qx + 0.5, state.qx),
        state.qy
    )


# Steady vortex

def _vortex(x, y, params):
    r2 = x ** 2 + y ** 2
    z = 0.2 * np.exp(0.5 * (1.0 - r2))
    h = 1.0 - np.exp(2.0 * (1.0 - r2)) / (4.0 * params.g) - z
    e = np.exp(1.0 - r2)
    return h, h * y * e, -h * x * e, z


# Two-dimensional steady state with topography and friction

def _topo_friction(x, y, params):
    r = np.sqrt(x ** 2 + y ** 2)
    z = (2.0 * params.k_manning * r - 1.0) / (2.0 * params.g * r ** 2)
    return np.ones_like(r), x / r ** 2, y / r ** 2, z


# Dam breaks

def _slope(x, y):
    return np.exp(x - 1.0) - np.exp(-1.0) + 0.0 * y


def _dry_dam_level(x, y):
    return np.where(x < 0.5, 2.0, -np.inf) + 0.0 * y


def _broken_dam(x, y):
    gap = (x > -5.0) & (x < 5.0)
    wing = gap & (np.abs(y) >= 40.0)
    return np.select(
        [x <= -5.0, x >= 5.0, wing],
        [1.0, 0.0, 12.0],
        default=0.1 * (5.0 - x)
    )


PARTIAL_DAM_RESERVOIR = 10.0
PARTIAL_DAM_TAILWATER = 5.0


def _partial_dam_level(x, y):
    return np.where(x <= -5.0, PARTIAL_DAM_RESERVOIR, PARTIAL_DAM_TAILWATER) + 0.0 * y


def _sides(left, right, bottom, top) -> BoundarySpec:
    return BoundarySpec(left, right, bottom, top)


@dataclass(frozen=True)
class CaseSpec:
    """
    One benchmark problem with its defaults

    data gives the cell averages used for the initial state and, when
    exact is set, for the reference solution and dirichlet ghosts.
    """

    name: str
    description: str
    box: Tuple[float, float, float, float]
    nx: int
    ny: int
    t_end: float
    k_manning: float
    data: CellData
    boundary_kinds: Tuple[str, str, str, str]
    cutoff: float = np.inf
    char_len: Optional[Tuple[float, float]] = None
    g: float = 9.81
    exact: bool = False
    reference: Optional[CellData] = None
    boundary_data: Optional[CellData] = None
    imposed: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    perturbation: Optional[Callable[[np.ndarray, np.ndarray, ConservedState], ConservedState]] = None
    report: Tuple[str, ...] = ()

    @property
    def has_reference(self) -> bool:
        return self.exact or self.reference is not None

    def handle(self, grid: Grid2D, degree: int, params: PhysParams, source: Optional[CellData] = None) -> AnalyticHandle:
        """Analytic handle giving cell averages at cell centers (x, y)"""
        source = source or self.data

        def evaluate(x, y, t):
            return source(x, y, grid.dx, grid.dy, degree, params)

        return evaluate

    def reference_handle(self, grid: Grid2D, degree: int, params: PhysParams) -> Optional[AnalyticHandle]:
        if self.reference is not None:
            return self.handle(grid, degree, params, self.reference)
        if self.exact:
            return self.handle(grid, degree, params)
        return None

    def boundaries(self, grid: Grid2D, degree: int, params: PhysParams) -> BoundarySpec:
        """Boundary set with dirichlet handles bound to the grid"""
        handle = self.handle(grid, degree, params, self.boundary_data)
        conds = []
        for side, kind in zip(('left', 'right', 'bottom', 'top'), self.boundary_kinds):
            bkind = BoundaryKind(kind)
            if bkind is BoundaryKind.DIRICHLET:
                conds.append(BoundaryCondition(bkind, handle, self.imposed.get(side, ('h', 'qx', 'qy'))))
            else:
                conds.append(BoundaryCondition(bkind))
        return _sides(*conds)


CASES: Dict[str, CaseSpec] = {
    case.name: case for case in (
        CaseSpec(
            name='lake_at_rest_cone',
            description='Lake at rest around an emerged cone, with friction',
            box=(0.0, 1.0, 0.0, 1.0), nx=50, ny=50, t_end=0.1, k_manning=10.0,
            data=lake_at_rest(_cone, lambda x, y: np.ones_like(x)),
            boundary_kinds=('dirichlet',) * 4,
            exact=True,
            report=('eta', 'q'),
        ),
        CaseSpec(
            name='goutal_maurel',
            description='Subcritical steady flow over a bump, reached after a transient',
            box=(0.0, 25.0, 0.0, 1.0), nx=100, ny=1, t_end=500.0, k_manning=0.0,
            data=lake_at_rest(_bump, lambda x, y: np.full_like(x, GOUTAL_LEVEL)),
            boundary_kinds=('dirichlet', 'dirichlet', 'neumann', 'neumann'),
            char_len=(0.5, 1.0),
            reference=goutal_steady,
            boundary_data=goutal_boundary,
            imposed={'left': ('qx',), 'right': ('h',)},
            report=('psi_topo', 'q'),
        ),
        CaseSpec(
            name='friction_steady_perturbed',
            description='Perturbed friction steady state over a flat bottom',
            box=(0.0, 1.0, 0.0, 1.0), nx=100, ny=1, t_end=5.0, k_manning=1.0,
            data=friction_steady,
            boundary_kinds=('dirichlet', 'dirichlet', 'neumann', 'neumann'),
            char_len=(1.0 / 15.0, 1.0),
            exact=True,
            perturbation=friction_perturbation,
            report=('psi_fric', 'q'),
        ),
        CaseSpec(
            name='steady_vortex',
            description='Steady vortex over a Gaussian bump',
            box=(-1.0, 1.0, -1.0, 1.0), nx=40, ny=40, t_end=1.0, k_manning=0.0,
            data=averaged(_vortex),
            boundary_kinds=('dirichlet',) * 4,
            exact=True,
            report=('h', 'q'),
        ),
        CaseSpec(
            name='topo_friction_exact',
            description='Two-dimensional steady state balancing topography and friction',
            box=(0.4, 1.0, 0.4, 1.0), nx=40, ny=40, t_end=0.1, k_manning=1.0,
            data=averaged(_topo_friction),
            boundary_kinds=('dirichlet',) * 4,
            exact=True,
            report=('h', 'q'),
        ),
        CaseSpec(
            name='dry_dam_break',
            description='Double dam break on a dry exponential slope',
            box=(0.0, 1.0, 0.0, 1.0), nx=25, ny=2, t_end=0.07, k_manning=1.0,
            data=lake_at_rest(_slope, _dry_dam_level),
            boundary_kinds=('wall',) * 4,
            char_len=(0.1, 1.0),
        ),
        CaseSpec(
            name='partial_dam_break',
            description='Partial break of a 10 m wide dam',
            box=(-100.0, 100.0, -100.0, 100.0), nx=100, ny=100, t_end=7.0, k_manning=0.0,
            data=lake_at_rest(_broken_dam, _partial_dam_level),
            boundary_kinds=('wall',) * 4,
            cutoff=0.5,
        ),
    )
}


def get_case(name: str) -> CaseSpec:
    try:
        return CASES[name]
    except KeyError:
        raise ConfigError(f"unknown case '{name}'; available: {', '.join(sorted(CASES))}") from None


def init_case(case: CaseSpec, grid: Grid2D, degree: int, params: PhysParams) -> FieldSet:
    """
    Initial fields of a case on every cell, ghosts included

    Args:
        case: Benchmark case
        grid: Mesh covering the case domain
        degree: Degree selecting the averaging rule
        params: Physical parameters

    Returns:
        FieldSet at t = 0 (ghosts hold the initial data, callers refill them)
    """
    x0, x1, y0, y1 = case.box
    extent = (grid.origin[0], grid.origin[0] + grid.extent[0], grid.origin[1], grid.origin[1] + grid.extent[1])
    if not np.allclose(extent, (x0, x1, y0, y1)):
        raise ConfigError(f"grid covers {extent}, case '{case.name}' needs {case.box}")

    xc, yc = grid.cell_centers()
    state, z = case.data(xc, yc, grid.dx, grid.dy, degree, params)
    if case.perturbation is not None:
        state = case.perturbation(xc, yc, state)

    fields = FieldSet.zeros(grid)
    for comp, values in enumerate(state):
        fields.state[comp] = np.broadcast_to(values, xc.shape)
    fields.z[...] = np.broadcast_to(z, xc.shape)
    logger.info(f"Initialized {case.name} on {grid.nx}x{grid.ny} cells (degree {degree})")
    return fields
