"""
Core Vocabulary
Grid, conserved state, physical parameters, boundary handling and admissibility
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, NamedTuple, Optional, Tuple, Union

import numpy as np

from .exceptions import BoundaryError, ConfigError, NumericalFault
from .reconstruction import stencil_radius

logger = logging.getLogger(__name__)

H_DRY = 1e-12
DEFAULT_ETA = 7.0 / 3.0

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PhysParams:
    """Gravity, Manning coefficient and friction exponent"""

    g: float = 9.81
    k_manning: float = 0.0
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not self.g > 0:
            raise ConfigError(f"gravity must be positive, got {self.g}")
        if not self.k_manning >= 0:
            raise ConfigError(f"Manning coefficient must be >= 0, got {self.k_manning}")
        if self.eta == 1.0:
            raise ConfigError("friction exponent eta = 1 is singular")


class ConservedState(NamedTuple):
    """Water height and discharge; fields may be floats or equally shaped arrays"""

    h: ArrayLike
    qx: ArrayLike
    qy: ArrayLike


def velocity(s: ConservedState, h_dry: float = H_DRY) -> Tuple[np.ndarray, np.ndarray]:
    """
    Velocity components with the dry convention

    Args:
        s: Conserved state
        h_dry: Heights at or below this value count as dry

    Returns:
        Tuple (ux, uy), zero in dry cells
    """
    h = np.asarray(s.h, dtype=float)
    wet = h > h_dry
    safe_h = np.where(wet, h, 1.0)
    ux = np.where(wet, np.asarray(s.qx, dtype=float) / safe_h, 0.0)
    uy = np.where(wet, np.asarray(s.qy, dtype=float) / safe_h, 0.0)
    return ux, uy


def physical_flux_x(s: ConservedState, g: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x-direction physical flux (qx, qx^2/h + g h^2/2, qx qy/h); zero for dry states"""
    h = np.asarray(s.h, dtype=float)
    wet = h > H_DRY
    ux, _ = velocity(s)
    qx = np.asarray(s.qx, dtype=float)
    qy = np.asarray(s.qy, dtype=float)
    f_h = np.where(wet, qx, 0.0)
    f_qx = np.where(wet, qx * ux + 0.5 * g * h * h, 0.0)
    f_qy = np.where(wet, qy * ux, 0.0)
    return f_h, f_qx, f_qy


def physical_flux_y(s: ConservedState, g: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """y-direction flux, the x flux of the rotated state with transverse parts swapped"""
    f_h, f_n, f_t = physical_flux_x(ConservedState(s.h, s.qy, s.qx), g)
    return f_h, f_t, f_n


def ghost_width(degree: int) -> int:
    """Ghost layers needed so reconstructions exist in the first ghost ring"""
    if degree <= 0:
        return 2
    return max(2, stencil_radius(degree) + 1)


@dataclass(frozen=True)
class Grid2D:
    """Uniform Cartesian mesh with a ghost frame; arrays are indexed [row=j, col=i]"""

    nx: int
    ny: int
    dx: float
    dy: float
    origin: Tuple[float, float] = (0.0, 0.0)
    ghost: int = 2

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"grid needs at least one cell per direction, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ConfigError(f"cell sizes must be positive, got dx={self.dx}, dy={self.dy}")
        if self.ghost < 1:
            raise ConfigError("ghost width must be at least 1")

    @classmethod
    def from_box(
        cls,
        box: Tuple[float, float, float, float],
        nx: int,
        ny: int,
        degree: int = 0
    ) -> 'Grid2D':
        """
        Build a grid covering box = (x0, x1, y0, y1)

        Args:
            box: Domain bounds
            nx: Interior cells along x
            ny: Interior cells along y
            degree: Reconstruction degree, sets the ghost width

        Returns:
            Grid2D instance
        """
        x0, x1, y0, y1 = box
        if nx < 1 or ny < 1:
            raise ConfigError(f"grid needs at least one cell per direction, got {nx}x{ny}")
        return cls(
            nx=nx,
            ny=ny,
            dx=(x1 - x0) / nx,
            dy=(y1 - y0) / ny,
            origin=(x0, y0),
            ghost=ghost_width(degree)
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ny + 2 * self.ghost, self.nx + 2 * self.ghost

    @property
    def interior(self) -> Tuple[slice, slice]:
        g = self.ghost
        return slice(g, g + self.ny), slice(g, g + self.nx)

    @property
    def delta(self) -> float:
        return min(self.dx, self.dy)

    @property
    def extent(self) -> Tuple[float, float]:
        return self.nx * self.dx, self.ny * self.dy

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates for every cell, ghosts included"""
        g = self.ghost
        i = np.arange(-g, self.nx + g)
        j = np.arange(-g, self.ny + g)
        xc = self.origin[0] + (i + 0.5) * self.dx
        yc = self.origin[1] + (j + 0.5) * self.dy
        return np.meshgrid(xc, yc)

    def interior_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        xc, yc = self.cell_centers()
        rows, cols = self.interior
        return xc[rows, cols], yc[rows, cols]


@dataclass
class FieldSet:
    """Per-cell state (3, NY, NX) ordered (h, qx, qy), topography z (NY, NX) and time"""

    state: np.ndarray
    z: np.ndarray
    time: float = 0.0

    @classmethod
    def zeros(cls, grid: Grid2D, time: float = 0.0) -> 'FieldSet':
        ny, nx = grid.shape
        return cls(np.zeros((3, ny, nx)), np.zeros((ny, nx)), time)

    @property
    def h(self) -> np.ndarray:
        return self.state[0]

    @property
    def qx(self) -> np.ndarray:
        return self.state[1]

    @property
    def qy(self) -> np.ndarray:
        return self.state[2]

    def conserved(self) -> ConservedState:
        return ConservedState(self.state[0], self.state[1], self.state[2])

    def copy(self) -> 'FieldSet':
        return FieldSet(self.state.copy(), self.z.copy(), self.time)

    def with_state(self, state: np.ndarray, time: Optional[float] = None) -> 'FieldSet':
        """New FieldSet sharing topography, with the given state array"""
        return replace(self, state=state, time=self.time if time is None else time)

    def __add__(self, other: 'FieldSet') -> 'FieldSet':
        return FieldSet(self.state + other.state, self.z, self.time + other.time)

    def __rmul__(self, weight: float) -> 'FieldSet':
        # Runge-Kutta combinations are convex, so the time combines like the state.
        return FieldSet(weight * self.state, self.z, weight * self.time)

    def total_mass(self, grid: Grid2D) -> float:
        rows, cols = grid.interior
        return float(np.sum(self.h[rows, cols]) * grid.dx * grid.dy)


# Handle returning cell averages (state, z) for cells centred at (x, y) at time t.
AnalyticHandle = Callable[[np.ndarray, np.ndarray, float], Tuple[ConservedState, np.ndarray]]


class BoundaryKind(Enum):
    NEUMANN = 'neumann'
    WALL = 'wall'
    DIRICHLET = 'dirichlet'
    PERIODIC = 'periodic'


@dataclass(frozen=True)
class BoundaryCondition:
    """
    One side of the domain

    A dirichlet side may impose a subset of (h, qx, qy); the remaining
    components are extrapolated with zero gradient.
    """

    kind: BoundaryKind
    handle: Optional[AnalyticHandle] = None
    imposed: Tuple[str, ...] = ('h', 'qx', 'qy')


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary kinds for the left, right, bottom and top sides"""

    left: BoundaryCondition
    right: BoundaryCondition
    bottom: BoundaryCondition
    top: BoundaryCondition

    @classmethod
    def uniform(cls, kind: BoundaryKind, handle: Optional[AnalyticHandle] = None) -> 'BoundarySpec':
        cond = BoundaryCondition(kind, handle)
        return cls(cond, cond, cond, cond)

    def validate(self):
        """Reject dirichlet sides without handle and unpaired periodic sides"""
        for name in ('left', 'right', 'bottom', 'top'):
            cond = getattr(self, name)
            if cond.kind is BoundaryKind.DIRICHLET and cond.handle is None:
                raise BoundaryError(f"dirichlet boundary on {name} side has no analytic handle")
            unknown = set(cond.imposed) - {'h', 'qx', 'qy'}
            if unknown:
                raise BoundaryError(f"unknown imposed components {sorted(unknown)} on {name} side")
        for a, b in (('left', 'right'), ('bottom', 'top')):
            periodic = [getattr(self, s).kind is BoundaryKind.PERIODIC for s in (a, b)]
            if periodic[0] != periodic[1]:
                raise BoundaryError(f"periodic boundary must be set on both {a} and {b} sides")


_COMPONENTS = {'h': 0, 'qx': 1, 'qy': 2}


def _side_indices(side: str, grid: Grid2D, kind: BoundaryKind) -> Tuple[np.ndarray, np.ndarray]:
    """Ghost indices along the normal axis and the interior indices they copy from"""
    g = grid.ghost
    n = grid.nx if side in ('left', 'right') else grid.ny
    k = np.arange(1, g + 1)
    if side in ('left', 'bottom'):
        ghost = g - k
        if kind is BoundaryKind.WALL:
            src = g + k - 1
        elif kind is BoundaryKind.PERIODIC:
            src = g + n - k
        else:
            src = np.full(g, g)
    else:
        ghost = g + n - 1 + k
        if kind is BoundaryKind.WALL:
            src = g + n - k
        elif kind is BoundaryKind.PERIODIC:
            src = g + k - 1
        else:
            src = np.full(g, g + n - 1)
    return ghost, src


def _fill_side(fields: FieldSet, grid: Grid2D, side: str, cond: BoundaryCondition):
    state, z = fields.state, fields.z
    ghost, src = _side_indices(side, grid, cond.kind)
    along_x = side in ('left', 'right')
    g = grid.ghost

    def take(arr, idx):
        if along_x:
            return arr[..., g:g + grid.ny, idx]
        return arr[..., idx, :]

    def put(arr, idx, values):
        if along_x:
            arr[..., g:g + grid.ny, ghost if idx is None else idx] = values
        else:
            arr[..., ghost if idx is None else idx, :] = values

    put(state, None, take(state, src))
    put(z, None, take(z, src))
    normal = 1 if along_x else 2

    if cond.kind is BoundaryKind.WALL:
        put(state[normal], None, -take(state[normal], ghost))
    elif cond.kind is BoundaryKind.DIRICHLET:
        xc, yc = grid.cell_centers()
        exact, z_exact = cond.handle(take(xc, ghost), take(yc, ghost), fields.time)
        for name in cond.imposed:
            comp = _COMPONENTS[name]
            put(state[comp], None, np.broadcast_to(exact[comp], take(state[comp], ghost).shape))
        put(z, None, np.broadcast_to(z_exact, take(z, ghost).shape))


def fill_ghosts(fields: FieldSet, grid: Grid2D, bc: BoundarySpec, degree: int = 0) -> FieldSet:
    """
    Fill the ghost frame according to the boundary set

    x sides are filled over interior rows first, then y sides over the full
    width so that corner cells are consistent.

    Args:
        fields: Current fields (left untouched)
        grid: Mesh
        bc: Boundary kinds per side
        degree: Reconstruction degree the ghosts must support

    Returns:
        New FieldSet with ghosts filled
    """
    bc.validate()
    if grid.ghost < ghost_width(degree):
        raise ConfigError(
            f"ghost width {grid.ghost} too small for degree {degree} (needs {ghost_width(degree)})"
        )
    out = fields.copy()
    for side in ('left', 'right', 'bottom', 'top'):
        _fill_side(out, grid, side, getattr(bc, side))
    return out


def check_admissible(fields: FieldSet, grid: Grid2D, step: Optional[int] = None):
    """Raise NumericalFault on non-finite values or negative heights in interior cells"""
    rows, cols = grid.interior
    interior = fields.state[:, rows, cols]
    bad = ~np.isfinite(interior).all(axis=0)
    if bad.any():
        cells = [(int(i), int(j)) for j, i in zip(*np.nonzero(bad))]
        logger.error(f"Non-finite state in {int(bad.sum())} cells at t={fields.time:.6g}")
        raise NumericalFault("non-finite state", step=step, time=fields.time, cells=cells)
    negative = interior[0] < 0.0
    if negative.any():
        cells = [(int(i), int(j)) for j, i in zip(*np.nonzero(negative))]
        logger.error(f"Negative water height in {int(negative.sum())} cells at t={fields.time:.6g}")
        raise NumericalFault("negative water height", step=step, time=fields.time, cells=cells)
