"""
Approximate Riemann Solver
Two-intermediate-state HLL-type solver with well-balanced topography and friction source averages

Every function is elementwise over numpy arrays so a whole row of
interfaces is processed in one call. States are given in the frame of the
interface: qx is the normal discharge and qy the transverse one.
"""
import logging
from typing import NamedTuple, Tuple

import numpy as np

from .core import H_DRY, ConservedState, PhysParams, physical_flux_x, velocity

logger = logging.getLogger(__name__)

EPS_LAMBDA = 1e-10
EPS_ALPHA = 1e-10
EPS_EQUAL = 1e-12
EPS_FLAT = 1e-12


class WaveSpeeds(NamedTuple):
    lam_l: np.ndarray
    lam_r: np.ndarray


class HllMeans(NamedTuple):
    h_hll: np.ndarray
    q_hll: np.ndarray


class SourcePair(NamedTuple):
    """Source average times dx, and the same divided by alpha"""

    s_dx: np.ndarray
    s_dx_over_alpha: np.ndarray

    def __add__(self, other: 'SourcePair') -> 'SourcePair':
        return SourcePair(self.s_dx + other.s_dx, self.s_dx_over_alpha + other.s_dx_over_alpha)


class IntermediateStates(NamedTuple):
    h_l_star: np.ndarray
    h_r_star: np.ndarray
    q_star: np.ndarray


class NumericalFlux(NamedTuple):
    """Interface flux (h, normal, transverse) with the source pairs used to build it"""

    flux: Tuple[np.ndarray, np.ndarray, np.ndarray]
    topo: SourcePair
    fric: SourcePair


def _sign(x) -> np.ndarray:
    return np.sign(np.asarray(x, dtype=float))


def wave_speeds(wl: ConservedState, wr: ConservedState, g: float) -> WaveSpeeds:
    """Outermost wave speeds with the +/- EPS_LAMBDA floor"""
    ul, _ = velocity(wl)
    ur, _ = velocity(wr)
    cl = np.sqrt(g * np.maximum(np.asarray(wl.h, dtype=float), 0.0))
    cr = np.sqrt(g * np.maximum(np.asarray(wr.h, dtype=float), 0.0))
    lam_l = np.minimum(np.minimum(-np.abs(ul) - cl, -np.abs(ur) - cr), -EPS_LAMBDA)
    lam_r = np.maximum(np.maximum(np.abs(ul) + cl, np.abs(ur) + cr), EPS_LAMBDA)
    return WaveSpeeds(lam_l, lam_r)


def hll_means(wl: ConservedState, wr: ConservedState, sp: WaveSpeeds, g: float) -> HllMeans:
    """Integral-consistent HLL averages of h and normal discharge"""
    _, fl, _ = physical_flux_x(wl, g)
    _, fr, _ = physical_flux_x(wr, g)
    hl, hr = np.asarray(wl.h, dtype=float), np.asarray(wr.h, dtype=float)
    ql, qr = np.asarray(wl.qx, dtype=float), np.asarray(wr.qx, dtype=float)
    width = sp.lam_r - sp.lam_l
    h_hll = (sp.lam_r * hr - sp.lam_l * hl - (qr - ql)) / width
    q_hll = (sp.lam_r * qr - sp.lam_l * ql - (fr - fl)) / width
    return HllMeans(h_hll, q_hll)


def harmonic_discharge(ql, qr) -> np.ndarray:
    """Signed harmonic mean of the discharges, zero if either vanishes"""
    ql = np.asarray(ql, dtype=float)
    qr = np.asarray(qr, dtype=float)
    al, ar = np.abs(ql), np.abs(qr)
    both = (al > 0) & (ar > 0)
    denom = np.where(both, al + ar, 1.0)
    return np.where(both, 2.0 * al * ar / denom * _sign(ql + qr), 0.0)


def alpha_coeff(hl, hr, q_bar, g: float) -> np.ndarray:
    """alpha = -q^2/(hL hR) + g (hL + hR)/2, defined for wet pairs"""
    hl = np.asarray(hl, dtype=float)
    hr = np.asarray(hr, dtype=float)
    prod = hl * hr
    safe = np.where(prod > 0, prod, 1.0)
    return np.where(prod > 0, -np.asarray(q_bar) ** 2 / safe, 0.0) + 0.5 * g * (hl + hr)


def alpha_tolerance(hl, hr, g: float) -> np.ndarray:
    return EPS_ALPHA * g * np.maximum(np.maximum(hl, hr), 1.0)


def resonant(alpha, hl, hr, g: float) -> np.ndarray:
    """True where alpha is too close to zero to divide by"""
    return np.abs(alpha) < alpha_tolerance(hl, hr, g)


def divide_by_alpha(s_dx, alpha, hl, hr, g: float) -> np.ndarray:
    """s_dx / alpha with alpha replaced by +/- its tolerance near resonance"""
    alpha = np.asarray(alpha, dtype=float)
    tol = alpha_tolerance(hl, hr, g)
    near = resonant(alpha, hl, hr, g)
    if np.any(near):
        logger.debug(f"Clamped {int(np.count_nonzero(near))} resonant alpha values")
    sign = np.where(alpha < 0, -1.0, 1.0)
    return np.asarray(s_dx, dtype=float) / np.where(near, sign * tol, alpha)


def height_cutoff(hl, hr, c: float, dx: float) -> np.ndarray:
    """Height jump clamped to +/- C dx"""
    jump = np.asarray(hr, dtype=float) - np.asarray(hl, dtype=float)
    limit = c * dx
    return np.where(np.abs(jump) <= limit, jump, _sign(jump) * limit)


def flat_bottom(zl, zr) -> np.ndarray:
    """True where the topography jump is round-off relative to max(|zl|, |zr|, 1)"""
    zl = np.asarray(zl, dtype=float)
    zr = np.asarray(zr, dtype=float)
    scale = np.maximum(np.maximum(np.abs(zl), np.abs(zr)), 1.0)
    return np.abs(zr - zl) <= EPS_FLAT * scale


def source_topo(
    wl: ConservedState,
    wr: ConservedState,
    zl,
    zr,
    dx: float,
    c: float,
    g: float
) -> SourcePair:
    """
    Topography source average for one interface

    Branches in priority order: dry left below a wet right lake, dry right
    below a wet left lake, any other dry pair, both wet.

    Args:
        wl: Left state
        wr: Right state
        zl: Left topography
        zr: Right topography
        dx: Cell size along the normal
        c: Height cutoff constant
        g: Gravity

    Returns:
        SourcePair (S dx, S dx / alpha)
    """
    hl = np.asarray(wl.h, dtype=float)
    hr = np.asarray(wr.h, dtype=float)
    ql = np.asarray(wl.qx, dtype=float)
    qr = np.asarray(wr.qx, dtype=float)
    zl = np.asarray(zl, dtype=float)
    zr = np.asarray(zr, dtype=float)
    dry_l = hl <= H_DRY
    dry_r = hr <= H_DRY
    dz = zr - zl

    branch_a = (qr == 0) & dry_l & (hr + zr <= zl)
    branch_b = ~branch_a & (ql == 0) & dry_r & (hl + zl <= zr)
    branch_c = ~branch_a & ~branch_b & (dry_l | dry_r)
    branch_d = ~(dry_l | dry_r)

    hsum = np.where(branch_d, hl + hr, 1.0)
    # No cubic term on a flat bottom, round-off jumps included.
    jump = np.where(flat_bottom(zl, zr), 0.0, height_cutoff(hl, hr, c, dx))
    s_wet = -2.0 * g * dz * hl * hr / hsum + 0.5 * g * jump ** 3 / hsum
    alpha = alpha_coeff(hl, hr, harmonic_discharge(ql, qr), g)
    r_wet = divide_by_alpha(np.where(branch_d, s_wet, 0.0), np.where(branch_d, alpha, 1.0), hl, hr, g)

    s_dx = np.select(
        [branch_a, branch_b, branch_c],
        [0.5 * g * hr ** 2, -0.5 * g * hl ** 2, -0.5 * g * dz * (hl + hr)],
        default=s_wet
    )
    ratio = np.select(
        [branch_a, branch_b, branch_c],
        [hr, -hl, -dz],
        default=r_wet
    )
    return SourcePair(s_dx, ratio)


def _friction_weights(hl, hr, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean of h^-eta and the cutoff correction factor for a wet pair

    Returns (B, G) with h_bar^-eta = B - mu [h]_c G / (k dx^(d+1)); both
    take their equal-height limits (h_m^-eta, 0) when the heights coincide.
    """
    hm = 0.5 * (hl + hr)
    close = np.abs(hr - hl) < EPS_EQUAL * np.maximum(hl, hr)
    hl_s = np.where(close, 1.0, hl)
    hr_s = np.where(close, 2.0, hr)
    top = hr_s ** (eta + 2) - hl_s ** (eta + 2)
    b = 0.5 * (eta + 2) * (hr_s ** 2 - hl_s ** 2) / top
    g_factor = (
        -1.0 / (hl_s * hr_s)
        + 0.5 * (hl_s + hr_s) * (hr_s ** (eta - 1) - hl_s ** (eta - 1)) / (eta - 1) * (eta + 2) / top
    )
    return np.where(close, hm ** (-eta), b), np.where(close, 0.0, g_factor)


def source_fric(
    wl: ConservedState,
    wr: ConservedState,
    dx: float,
    c: float,
    k: float,
    eta: float,
    degree: int,
    g: float = 9.81
) -> SourcePair:
    """
    Friction source average, scaled by dx^(degree+1) for the high-order variant

    Vanishes if a side is dry, k = 0 or the harmonic discharge is zero.
    """
    hl = np.asarray(wl.h, dtype=float)
    hr = np.asarray(wr.h, dtype=float)
    q_bar = harmonic_discharge(wl.qx, wr.qx)
    active = (hl > H_DRY) & (hr > H_DRY) & (q_bar != 0) & (k > 0)
    if not np.any(active):
        zero = np.zeros(np.broadcast(hl, hr, q_bar).shape)
        return SourcePair(zero, zero.copy())

    hl_s = np.where(active, hl, 1.0)
    hr_s = np.where(active, hr, 1.0)
    b, g_factor = _friction_weights(hl_s, hr_s, eta)
    jump = height_cutoff(hl_s, hr_s, c, dx)
    s_dx = -k * q_bar * np.abs(q_bar) * b * dx ** (degree + 1) + q_bar ** 2 * jump * g_factor
    s_dx = np.where(active, s_dx, 0.0)
    alpha = alpha_coeff(hl_s, hr_s, q_bar, g)
    ratio = np.where(active, divide_by_alpha(s_dx, alpha, hl_s, hr_s, g), 0.0)
    return SourcePair(s_dx, ratio)


def intermediate_states(
    wl: ConservedState,
    wr: ConservedState,
    sp: WaveSpeeds,
    hll: HllMeans,
    src: SourcePair
) -> IntermediateStates:
    """Intermediate heights and discharge with the positivity caps"""
    width = sp.lam_r - sp.lam_l
    q_star = hll.q_hll + src.s_dx / width
    h_l = np.minimum(
        np.maximum(hll.h_hll - sp.lam_r * src.s_dx_over_alpha / width, 0.0),
        (1.0 - sp.lam_r / sp.lam_l) * hll.h_hll
    )
    h_r = np.minimum(
        np.maximum(hll.h_hll - sp.lam_l * src.s_dx_over_alpha / width, 0.0),
        (1.0 - sp.lam_l / sp.lam_r) * hll.h_hll
    )
    return IntermediateStates(h_l, h_r, q_star)


def numerical_flux(
    wl: ConservedState,
    wr: ConservedState,
    zl,
    zr,
    dx: float,
    params: PhysParams,
    c: float,
    degree: int = 0
) -> NumericalFlux:
    """
    Interface flux of the two-state solver

    The transverse discharge is carried passively: both intermediate states
    use h* times the transverse velocity of the side q* flows from.

    Args:
        wl: Left state (normal, transverse discharge)
        wr: Right state
        zl: Left topography
        zr: Right topography
        dx: Cell size along the normal
        params: Physical parameters
        c: Height cutoff constant
        degree: Degree used to scale the friction source

    Returns:
        NumericalFlux with the flux triple and both source pairs
    """
    g = params.g
    sp = wave_speeds(wl, wr, g)
    hll = hll_means(wl, wr, sp, g)
    topo = source_topo(wl, wr, zl, zr, dx, c, g)
    fric = source_fric(wl, wr, dx, c, params.k_manning, params.eta, degree, g)
    star = intermediate_states(wl, wr, sp, hll, topo + fric)

    fl = physical_flux_x(wl, g)
    fr = physical_flux_x(wr, g)
    hl, hr = np.asarray(wl.h, dtype=float), np.asarray(wr.h, dtype=float)
    ql, qr = np.asarray(wl.qx, dtype=float), np.asarray(wr.qx, dtype=float)
    tl, tr = np.asarray(wl.qy, dtype=float), np.asarray(wr.qy, dtype=float)
    _, vl = velocity(wl)
    _, vr = velocity(wr)
    v_up = np.where(star.q_star > 0, vl, np.where(star.q_star < 0, vr, 0.5 * (vl + vr)))

    half_l = 0.5 * sp.lam_l
    half_r = 0.5 * sp.lam_r
    f_h = 0.5 * (fl[0] + fr[0]) + half_l * (star.h_l_star - hl) + half_r * (star.h_r_star - hr)
    f_n = 0.5 * (fl[1] + fr[1]) + half_l * (star.q_star - ql) + half_r * (star.q_star - qr)
    f_t = (
        0.5 * (fl[2] + fr[2])
        + half_l * (star.h_l_star * v_up - tl)
        + half_r * (star.h_r_star * v_up - tr)
    )
    return NumericalFlux((f_h, f_n, f_t), topo, fric)
