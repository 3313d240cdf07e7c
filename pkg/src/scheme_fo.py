"""
First-Order Scheme
Two-step well-balanced scheme: explicit transport with topography, then semi-implicit friction
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .core import (
    H_DRY,
    BoundarySpec,
    ConservedState,
    FieldSet,
    Grid2D,
    PhysParams,
    fill_ghosts,
)
from .exceptions import NumericalFault
from .riemann1d import EPS_EQUAL, numerical_flux, wave_speeds

logger = logging.getLogger(__name__)

POSITIVITY_SLACK = 1e-13


@dataclass(frozen=True)
class StepReport:
    """Time step and the quantities it was derived from"""

    dt_used: float
    lambda_max: float
    n_dry_cells: int


class SpatialIncrement(NamedTuple):
    """
    Per-cell rates before dt scaling, for interior cells

    flux_div_x/flux_div_y are (3, ny, nx) flux divergences per direction,
    topo_src and fric_src are (2, ny, nx) discharge sources (x, y).
    """

    flux_div_x: np.ndarray
    flux_div_y: np.ndarray
    topo_src: np.ndarray
    fric_src: np.ndarray
    bad_cells: np.ndarray


def rotate(state: np.ndarray) -> ConservedState:
    """State in the y-interface frame: (h, qy, qx)"""
    return ConservedState(state[0], state[2], state[1])


def interface_fluxes(
    fields: FieldSet,
    grid: Grid2D,
    params: PhysParams,
    c: float,
    direction: str
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fluxes at every interface of the interior cells along one direction

    Returns:
        (flux (3, ...) in (h, qx, qy) order, topography s_dx) with one more
        entry than cells along the sweep direction
    """
    g = grid.ghost
    rows, cols = grid.interior
    state, z = fields.state, fields.z
    if direction == 'x':
        left = (slice(None), rows, slice(g - 1, g + grid.nx))
        right = (slice(None), rows, slice(g, g + grid.nx + 1))
        res = numerical_flux(
            ConservedState(*state[left]), ConservedState(*state[right]),
            z[left[1:]], z[right[1:]], grid.dx, params, c
        )
        flux = np.stack(res.flux)
    else:
        low = (slice(None), slice(g - 1, g + grid.ny), cols)
        high = (slice(None), slice(g, g + grid.ny + 1), cols)
        res = numerical_flux(
            rotate(state[low]), rotate(state[high]),
            z[low[1:]], z[high[1:]], grid.dy, params, c
        )
        f_h, f_n, f_t = res.flux
        flux = np.stack((f_h, f_t, f_n))
    return flux, res.topo.s_dx


def first_order_increment(fields: FieldSet, grid: Grid2D, params: PhysParams, c: float) -> SpatialIncrement:
    """Flux divergences and interface-averaged topography source of the first-order scheme"""
    fx, sx = interface_fluxes(fields, grid, params, c, 'x')
    fy, sy = interface_fluxes(fields, grid, params, c, 'y')
    div_x = -(fx[:, :, 1:] - fx[:, :, :-1]) / grid.dx
    div_y = -(fy[:, 1:, :] - fy[:, :-1, :]) / grid.dy
    topo = np.stack((
        (sx[:, :-1] + sx[:, 1:]) / (2.0 * grid.dx),
        (sy[:-1, :] + sy[1:, :]) / (2.0 * grid.dy),
    ))
    return SpatialIncrement(div_x, div_y, topo, np.zeros_like(topo), np.zeros(topo.shape[1:], dtype=bool))


def step_report(fields: FieldSet, grid: Grid2D, params: PhysParams, degree: int, cfl_factor: float) -> StepReport:
    """CFL time step from the fastest wave over all x and y interfaces"""
    g = grid.ghost
    rows, cols = grid.interior
    s = fields.state
    sp_x = wave_speeds(
        ConservedState(*s[:, rows, g - 1:g + grid.nx]),
        ConservedState(*s[:, rows, g:g + grid.nx + 1]),
        params.g
    )
    sp_y = wave_speeds(
        rotate(s[:, g - 1:g + grid.ny, cols]),
        rotate(s[:, g:g + grid.ny + 1, cols]),
        params.g
    )
    lam = max(
        float(np.max(-sp_x.lam_l)), float(np.max(sp_x.lam_r)),
        float(np.max(-sp_y.lam_l)), float(np.max(sp_y.lam_r))
    )
    exponent = max(degree, 3) / 3.0
    dt = cfl_factor * grid.delta ** exponent / (2.0 * lam) if lam > 0 else np.inf
    n_dry = int(np.count_nonzero(fields.h[rows, cols] <= H_DRY))
    return StepReport(dt, lam, n_dry)


def cfl_dt(fields: FieldSet, grid: Grid2D, params: PhysParams, degree: int, cfl_factor: float) -> float:
    """Time step satisfying the CFL restriction for the given degree"""
    return step_report(fields, grid, params, degree, cfl_factor).dt_used


def _snap_positivity(state: np.ndarray, time: float):
    h = state[0]
    slack = POSITIVITY_SLACK * max(1.0, float(np.max(h)))
    if np.any(h < -slack):
        cells = [(int(i), int(j)) for j, i in zip(*np.nonzero(h < -slack))]
        logger.error(f"First-order step produced negative heights in {len(cells)} cells")
        raise NumericalFault("first-order step produced a negative water height", time=time, cells=cells)
    np.maximum(h, 0.0, out=h)


def explicit_step(fields: FieldSet, grid: Grid2D, params: PhysParams, dt: float, c: float) -> FieldSet:
    """
    Explicit transport and topography half step

    Ghost cells of the result keep the input values; callers refill them.

    Args:
        fields: Fields at time n with ghosts filled
        grid: Mesh
        params: Physical parameters
        dt: Time step
        c: Height cutoff constant

    Returns:
        Half-updated FieldSet
    """
    inc = first_order_increment(fields, grid, params, c)
    return apply_explicit(fields, grid, inc, dt)


def apply_explicit(fields: FieldSet, grid: Grid2D, inc: SpatialIncrement, dt: float) -> FieldSet:
    rows, cols = grid.interior
    out = fields.copy()
    interior = out.state[:, rows, cols]
    interior += dt * (inc.flux_div_x + inc.flux_div_y)
    interior[1:] += dt * inc.topo_src
    _snap_positivity(interior, fields.time)
    out.state[:, rows, cols] = interior
    return out


def _beta_gamma(ha: np.ndarray, hb: np.ndarray, eta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """beta and gamma at the interface between heights ha (left) and hb (right)"""
    close = np.abs(hb - ha) < EPS_EQUAL * np.maximum(ha, hb)
    hm = 0.5 * (ha + hb)
    a = np.where(close, 1.0, ha)
    b = np.where(close, 2.0, hb)
    beta = 0.5 * (eta + 2) * (b ** 2 - a ** 2) / (b ** (eta + 2) - a ** (eta + 2))
    gamma = (1.0 / b - 1.0 / a) + beta * (b ** (eta - 1) - a ** (eta - 1)) / (eta - 1)
    return np.where(close, hm ** (-eta), beta), np.where(close, 0.0, gamma), close


def friction_implicit_step(
    fields_half: FieldSet,
    fields_n: FieldSet,
    grid: Grid2D,
    params: PhysParams,
    dt: float
) -> FieldSet:
    """
    Semi-implicit friction update, per direction

    Falls back to the plain analytic update where the well-balanced mean
    height is undefined: zero signs, dry cells or neighbors, flat heights on
    both sides, or a non-positive or non-finite result.

    Args:
        fields_half: Half step with ghosts filled
        fields_n: Fields before the explicit step
        grid: Mesh
        params: Physical parameters
        dt: Time step

    Returns:
        FieldSet at time n+1
    """
    out = fields_half.copy()
    k = params.k_manning
    if k == 0:
        return out

    eta = params.eta
    g = grid.ghost
    rows, cols = grid.interior
    h = fields_half.h
    hc = h[rows, cols]
    q_half = fields_half.state[1:, rows, cols]
    q_n = fields_n.state[1:, rows, cols]
    norm = np.hypot(q_half[0], q_half[1])
    wet_c = hc > H_DRY
    h_safe = np.where(wet_c, hc, 1.0)
    plain = np.where(wet_c, h_safe ** eta, 0.0)

    neighbors = {
        0: (h[rows, g - 1:g + grid.nx - 1], h[rows, g + 1:g + grid.nx + 1], grid.dx),
        1: (h[g - 1:g + grid.ny - 1, cols], h[g + 1:g + grid.ny + 1, cols], grid.dy),
    }
    result = np.empty_like(q_half)
    fallbacks = 0
    for comp, (h_lo, h_hi, width) in neighbors.items():
        wet = wet_c & (h_lo > H_DRY) & (h_hi > H_DRY)
        lo = np.where(wet, h_lo, 1.0)
        hi = np.where(wet, h_hi, 1.0)
        beta_m, gamma_m, close_m = _beta_gamma(lo, h_safe, eta)
        beta_p, gamma_p, close_p = _beta_gamma(h_safe, hi, eta)
        mu_n = np.sign(q_n[comp])
        mu_h = np.sign(q_half[comp])
        denom = k * mu_n * width * (beta_m + beta_p) - (gamma_m + gamma_p)
        with np.errstate(divide='ignore', invalid='ignore'):
            h_bar = 2.0 * k * mu_h * width / denom + k * dt * mu_h * q_n[comp]
        degenerate = (mu_n == 0) | (mu_h == 0) | ~wet | (close_m & close_p)
        invalid = ~degenerate & ~(np.isfinite(h_bar) & (h_bar > 0))
        fallbacks += int(np.count_nonzero(invalid))
        h_eta = np.where(degenerate | invalid, plain, h_bar)
        with np.errstate(divide='ignore', invalid='ignore'):
            q_new = h_eta * q_half[comp] / (h_eta + k * dt * norm)
        result[comp] = np.where((q_half[comp] == 0) | ~wet_c, 0.0, q_new)

    if fallbacks:
        logger.debug(f"Friction step used the plain update in {fallbacks} non-degenerate cell directions")
    out.state[1:, rows, cols] = result
    return out


class FirstOrderScheme:
    """The first-order two-step scheme bound to a grid and boundary set"""

    def __init__(self, grid: Grid2D, params: PhysParams, bc: BoundarySpec, cutoff: float = np.inf, degree: int = 0):
        """
        Initialize the scheme

        Args:
            grid: Mesh
            params: Physical parameters
            bc: Boundary set used to refill ghosts between the steps
            cutoff: Height cutoff constant C
            degree: Degree the ghost frame is sized for
        """
        self.grid = grid
        self.params = params
        self.bc = bc
        self.cutoff = cutoff
        self.degree = degree

    def cfl_dt(self, fields: FieldSet, cfl_factor: float, degree: Optional[int] = None) -> float:
        return cfl_dt(fields, self.grid, self.params, self.degree if degree is None else degree, cfl_factor)

    def fill(self, fields: FieldSet) -> FieldSet:
        return fill_ghosts(fields, self.grid, self.bc, self.degree)

    def half_step(self, fields: FieldSet, dt: float) -> FieldSet:
        return self.fill(explicit_step(fields, self.grid, self.params, dt, self.cutoff))

    def friction(self, fields_half: FieldSet, fields_n: FieldSet, dt: float) -> FieldSet:
        return friction_implicit_step(fields_half, fields_n, self.grid, self.params, dt)

    def step(self, fields: FieldSet, dt: float) -> FieldSet:
        """One full two-step update of ghost-filled fields; the result has ghosts filled"""
        half = self.half_step(fields, dt)
        return self.fill(self.friction(half, fields, dt))
