"""
Well-Balanced Correction
Steady-state detectors and the convex combination of the high-order and first-order schemes
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import H_DRY, ConservedState, FieldSet, Grid2D, PhysParams
from .exceptions import ConfigError
from .scheme_fo import FirstOrderScheme, SpatialIncrement, apply_explicit, first_order_increment, rotate
from .scheme_ho import HighOrderScheme

logger = logging.getLogger(__name__)

# Relative size below which detector differences count as round-off.
DETECTOR_ROUNDOFF = 1e-13


@dataclass(frozen=True)
class DetectorParams:
    """Characteristic lengths and exponent of the blending parameter"""

    L_x: float
    L_y: float
    k_exp: float

    def __post_init__(self):
        if not (self.L_x > 0 and self.L_y > 0):
            raise ConfigError(f"characteristic lengths must be positive, got {self.L_x}, {self.L_y}")

    @classmethod
    def defaults(cls, grid: Grid2D, degree: int) -> 'DetectorParams':
        lx, ly = grid.extent
        return cls(lx, ly, degree + 1)


class ThetaField(NamedTuple):
    theta_x: np.ndarray
    theta_y: np.ndarray


def psi_topo(h, q, z, g: float) -> np.ndarray:
    """Bernoulli functional q^2/(2h^2) + g(h+Z); g Z in dry cells"""
    h = np.asarray(h, dtype=float)
    z = np.asarray(z, dtype=float)
    wet = h > H_DRY
    h_safe = np.where(wet, h, 1.0)
    return np.where(wet, np.asarray(q, dtype=float) ** 2 / (2.0 * h_safe ** 2) + g * (h + z), g * z)


def psi_fric(h, q, x, params: PhysParams) -> np.ndarray:
    """Friction steady functional"""
    h = np.maximum(np.asarray(h, dtype=float), 0.0)
    q = np.asarray(q, dtype=float)
    eta = params.eta
    return (
        -q ** 2 * h ** (eta - 1) / (eta - 1)
        + params.g * h ** (eta + 2) / (eta + 2)
        + params.k_manning * q * np.abs(q) * np.asarray(x, dtype=float)
    )


def _snap(value, scale) -> np.ndarray:
    return np.where(np.abs(value) <= DETECTOR_ROUNDOFF * scale, 0.0, value)


def steady_detector(
    wl: ConservedState,
    wr: ConservedState,
    zl,
    zr,
    xl,
    xr,
    params: PhysParams
) -> np.ndarray:
    """
    Product of the topography and friction steady-state residuals of a pair

    States are in the interface frame (qx normal). Emerged dry pairs at rest
    and differences at round-off level give zero.

    Args:
        wl: Left state
        wr: Right state
        zl: Left topography
        zr: Right topography
        xl: Left coordinate along the normal
        xr: Right coordinate along the normal
        params: Physical parameters

    Returns:
        Detector value >= 0
    """
    g = params.g
    hl, hr = np.asarray(wl.h, dtype=float), np.asarray(wr.h, dtype=float)
    ql, qr = np.asarray(wl.qx, dtype=float), np.asarray(wr.qx, dtype=float)
    zl, zr = np.asarray(zl, dtype=float), np.asarray(zr, dtype=float)

    pt_l, pt_r = psi_topo(hl, ql, zl, g), psi_topo(hr, qr, zr, g)
    pf_l, pf_r = psi_fric(hl, ql, xl, params), psi_fric(hr, qr, xr, params)
    d_topo = _snap(pt_r - pt_l, np.maximum(np.abs(pt_l), np.abs(pt_r)))
    d_fric = _snap(pf_r - pf_l, np.maximum(np.abs(pf_l), np.abs(pf_r)))

    q_scale = np.maximum.reduce([
        np.abs(ql), np.abs(qr), np.abs(np.asarray(wl.qy, dtype=float)), np.abs(np.asarray(wr.qy, dtype=float)),
        np.sqrt(g) * np.maximum(np.maximum(hl, hr), 0.0) ** 1.5,
    ])
    d_q = _snap(qr - ql, q_scale)
    t_l = _snap(np.asarray(wl.qy, dtype=float), q_scale)
    t_r = _snap(np.asarray(wr.qy, dtype=float), q_scale)
    transverse = 0.5 * (t_r ** 2 + t_l ** 2)

    eps = np.sqrt(d_topo ** 2 + d_q ** 2 + transverse) * np.sqrt(d_fric ** 2 + d_q ** 2 + transverse)

    dry_l, dry_r = hl <= H_DRY, hr <= H_DRY
    at_rest = (
        (_snap(ql, q_scale) == 0) & (_snap(qr, q_scale) == 0) & (t_l == 0) & (t_r == 0)
    )
    level_l, level_r = hl + zl, hr + zr
    tol = DETECTOR_ROUNDOFF * np.maximum(np.abs(level_l), np.abs(level_r))
    emerged = at_rest & (
        (dry_r & ~dry_l & (level_l <= zr + tol)) | (dry_l & ~dry_r & (level_r <= zl + tol))
    )
    return np.where(emerged, 0.0, eps)


def theta_interface(eps, dx: float, length: float, k_exp: float) -> np.ndarray:
    """Blend weight eps / (eps + (dx/L)^k)"""
    eps = np.asarray(eps, dtype=float)
    ref = (dx / length) ** k_exp
    return eps / (eps + ref)


def theta_cell(theta_left, theta_right) -> np.ndarray:
    """Quadratic mean of the two interface weights of a cell"""
    return np.sqrt(0.5 * (np.asarray(theta_left) ** 2 + np.asarray(theta_right) ** 2))


def compute_theta(fields: FieldSet, grid: Grid2D, params: PhysParams, det: DetectorParams) -> ThetaField:
    """Per-cell blend weights for the interior cells"""
    g = grid.ghost
    rows, cols = grid.interior
    s, z = fields.state, fields.z
    xc, yc = grid.cell_centers()

    left = (rows, slice(g - 1, g + grid.nx))
    right = (rows, slice(g, g + grid.nx + 1))
    eps_x = steady_detector(
        ConservedState(*s[(slice(None),) + left]), ConservedState(*s[(slice(None),) + right]),
        z[left], z[right], xc[left], xc[right], params
    )
    low = (slice(g - 1, g + grid.ny), cols)
    high = (slice(g, g + grid.ny + 1), cols)
    eps_y = steady_detector(
        rotate(s[(slice(None),) + low]), rotate(s[(slice(None),) + high]),
        z[low], z[high], yc[low], yc[high], params
    )
    tx = theta_interface(eps_x, grid.dx, det.L_x, det.k_exp)
    ty = theta_interface(eps_y, grid.dy, det.L_y, det.k_exp)
    return ThetaField(theta_cell(tx[:, :-1], tx[:, 1:]), theta_cell(ty[:-1, :], ty[1:, :]))


def blended_step(
    fields: FieldSet,
    fo: FirstOrderScheme,
    ho: HighOrderScheme,
    dt: float,
    cpd: np.ndarray,
    theta: ThetaField
) -> FieldSet:
    """
    One application of the blended two-step scheme

    Cells where both weights vanish (always the case for CPD 0) take the
    first-order values unchanged.

    Args:
        fields: Fields at time n with ghosts filled
        fo: First-order scheme (supplies boundaries and the friction step)
        ho: High-order scheme
        dt: Time step
        cpd: Per-cell degree map
        theta: Blend weights; CPD-0 cells are forced to 0

    Returns:
        FieldSet after the step with ghosts filled
    """
    grid = fo.grid
    rows, cols = grid.interior
    active_cells = cpd > 0
    tx = np.where(active_cells, theta.theta_x, 0.0)
    ty = np.where(active_cells, theta.theta_y, 0.0)
    blended = (tx > 0) | (ty > 0)

    fo_inc = first_order_increment(fields, grid, fo.params, fo.cutoff)
    half = apply_explicit(fields, grid, fo_inc, dt)
    ho_inc: Optional[SpatialIncrement] = None

    if blended.any():
        ho_inc = ho.spatial_operator(fields, cpd)
        w = fields.state[:, rows, cols]
        mixed = w + dt * (
            tx * ho_inc.flux_div_x + (1.0 - tx) * fo_inc.flux_div_x
            + ty * ho_inc.flux_div_y + (1.0 - ty) * fo_inc.flux_div_y
        )
        mixed[1] += dt * (tx * ho_inc.topo_src[0] + (1.0 - tx) * fo_inc.topo_src[0])
        mixed[2] += dt * (ty * ho_inc.topo_src[1] + (1.0 - ty) * fo_inc.topo_src[1])
        half.state[:, rows, cols] = np.where(blended, mixed, half.state[:, rows, cols])

    half = fo.fill(half)
    out = fo.friction(half, fields, dt)

    if ho_inc is not None:
        q_half = half.state[1:, rows, cols]
        q_wb = out.state[1:, rows, cols]
        q_ho = q_half + dt * ho_inc.fric_src
        out.state[1, rows, cols] = np.where(tx > 0, tx * q_ho[0] + (1.0 - tx) * q_wb[0], q_wb[0])
        out.state[2, rows, cols] = np.where(ty > 0, ty * q_ho[1] + (1.0 - ty) * q_wb[1], q_wb[1])
    return fo.fill(out)


class WellBalancedCorrection:
    """Blended scheme with detector-driven weights, or the plain high-order scheme when disabled"""

    def __init__(self, fo: FirstOrderScheme, ho: HighOrderScheme, det: DetectorParams, enabled: bool = True):
        """
        Initialize the correction

        Args:
            fo: First-order scheme
            ho: High-order scheme
            det: Detector parameters
            enabled: False gives theta = 1 on every cell
        """
        self.fo = fo
        self.ho = ho
        self.det = det
        self.enabled = enabled

    def theta(self, fields: FieldSet) -> ThetaField:
        if not self.enabled:
            ones = np.ones((self.fo.grid.ny, self.fo.grid.nx))
            return ThetaField(ones, ones.copy())
        return compute_theta(fields, self.fo.grid, self.fo.params, self.det)

    def step(self, fields: FieldSet, dt: float, cpd: np.ndarray, theta: Optional[ThetaField] = None) -> FieldSet:
        if theta is None:
            theta = self.theta(fields)
        return blended_step(fields, self.fo, self.ho, dt, cpd, theta)
