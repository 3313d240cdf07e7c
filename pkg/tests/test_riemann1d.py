"""
Tests for the two-state interface solver
"""
import numpy as np
import pytest

from src.core import ConservedState, PhysParams
from src.riemann1d import (
    EPS_LAMBDA, alpha_coeff, divide_by_alpha, flat_bottom, harmonic_discharge, height_cutoff, hll_means,
    intermediate_states, numerical_flux, resonant, source_fric, source_topo, wave_speeds,
)

G = 9.81


def state(h, q=0.0, t=0.0):
    return ConservedState(np.asarray(h, dtype=float), np.asarray(q, dtype=float), np.asarray(t, dtype=float))


class TestWaveSpeeds:
    """Test the outer wave speed estimates"""

    def test_rest_state(self):
        """Test symmetric speeds for a state at rest"""
        sp = wave_speeds(state(1.0), state(1.0), G)
        assert float(sp.lam_l) == pytest.approx(-3.13209, abs=1e-5)
        assert float(sp.lam_r) == pytest.approx(3.13209, abs=1e-5)

    def test_dry_floor(self):
        """Test both sides dry gives the speed floor"""
        sp = wave_speeds(state(0.0), state(0.0), G)
        assert float(sp.lam_l) == -EPS_LAMBDA
        assert float(sp.lam_r) == EPS_LAMBDA

    def test_moving_states(self):
        """Test the fastest side wins"""
        sp = wave_speeds(state(2.0, 2.0), state(1.0, -3.0), G)
        assert float(sp.lam_r) == pytest.approx(6.13209, abs=1e-5)
        assert float(sp.lam_l) == pytest.approx(-6.13209, abs=1e-5)


class TestAverages:
    """Test discharge means and the alpha coefficient"""

    def test_harmonic_discharge(self):
        """Test the signed harmonic mean"""
        assert float(harmonic_discharge(1.0, 3.0)) == pytest.approx(1.5)
        assert float(harmonic_discharge(-1.0, -3.0)) == pytest.approx(-1.5)
        assert float(harmonic_discharge(0.0, 3.0)) == 0.0

    def test_alpha(self):
        """Test alpha for a subcritical pair"""
        assert float(alpha_coeff(2.0, 1.0, 1.0, G)) == pytest.approx(14.215)

    def test_resonance(self):
        """Test critical flow is flagged and the division stays finite"""
        alpha = alpha_coeff(1.0, 1.0, np.sqrt(G), G)
        assert bool(resonant(alpha, 1.0, 1.0, G))
        assert np.isfinite(divide_by_alpha(1.0, alpha, 1.0, 1.0, G))

    def test_height_cutoff(self):
        """Test the height jump clamp"""
        assert float(height_cutoff(1.0, 1.001, 0.5, 0.1)) == pytest.approx(0.001)
        assert float(height_cutoff(1.0, 2.0, 0.5, 0.1)) == pytest.approx(0.05)
        assert float(height_cutoff(2.0, 1.0, 0.5, 0.1)) == pytest.approx(-0.05)


class TestSources:
    """Test interface source averages"""

    def test_lake_pair(self):
        """Test a wet lake pair reproduces the hydrostatic jump"""
        src = source_topo(state(1.0), state(0.5), 0.0, 0.5, 0.1, np.inf, G)
        assert float(src.s_dx) == pytest.approx(-3.67875)
        assert float(src.s_dx) == pytest.approx(0.5 * G * (0.5 ** 2 - 1.0))

    def test_walled_pond(self):
        """Test a dry bank above a wet lake"""
        src = source_topo(state(0.0), state(1.0), 5.0, 0.0, 0.1, np.inf, G)
        assert float(src.s_dx) == pytest.approx(4.905)
        assert float(src.s_dx_over_alpha) == pytest.approx(1.0)

    def test_flat_bottom(self):
        """Test a wet pair over flat ground has no topography source"""
        src = source_topo(state(1.0, 0.3), state(1.2, 0.3), 0.4, 0.4, 0.1, np.inf, G)
        assert float(src.s_dx) == 0.0
        assert float(src.s_dx_over_alpha) == 0.0

    def test_round_off_bottom(self):
        """Test a round-off topography jump gives a round-off source"""
        flat = source_topo(state(1.0, 0.3), state(1.2, 0.3), 0.4, 0.4, 0.1, np.inf, G)
        noisy = source_topo(state(1.0, 0.3), state(1.2, 0.3), 0.4, 0.4 + 4e-16, 0.1, np.inf, G)
        assert abs(float(noisy.s_dx) - float(flat.s_dx)) <= 1e-13
        assert abs(float(noisy.s_dx_over_alpha) - float(flat.s_dx_over_alpha)) <= 1e-13

    def test_flat_bottom_scale(self):
        """Test the flat-bottom tolerance is relative to the topography size"""
        assert bool(flat_bottom(0.0, 5e-13))
        assert bool(flat_bottom(1000.0, 1000.0 + 1e-10))
        assert not bool(flat_bottom(0.0, 1e-6))
        assert not bool(flat_bottom(1000.0, 1000.001))

    def test_friction_steady_pair(self):
        """Test the friction source balances the flux jump of a discrete steady pair"""
        eta, k, q = 7.0 / 3.0, 1.0, -0.5
        hl, hr = 0.58, 0.6
        # cell size for which the pair satisfies the discrete friction relation
        step = (-q ** 2 * (hr ** (eta - 1) - hl ** (eta - 1)) / (eta - 1)
                + G * (hr ** (eta + 2) - hl ** (eta + 2)) / (eta + 2)) / (-k * q * abs(q))
        src = source_fric(state(hl, q), state(hr, q), step, np.inf, k, eta, 0, G)
        jump = q ** 2 / hr + 0.5 * G * hr ** 2 - q ** 2 / hl - 0.5 * G * hl ** 2
        assert step > 0
        assert float(src.s_dx) == pytest.approx(jump, rel=1e-9, abs=1e-12)

    def test_friction_equal_heights(self):
        """Test friction source for equal heights at first order"""
        src = source_fric(state(1.0, 1.0), state(1.0, 1.0), 0.1, np.inf, 1.0, 7.0 / 3.0, 0, G)
        assert float(src.s_dx) == pytest.approx(-0.1)

    def test_friction_high_order_scaling(self):
        """Test the friction source scales with dx^(d+1)"""
        src = source_fric(state(1.0, 1.0), state(1.0, 1.0), 0.1, np.inf, 1.0, 7.0 / 3.0, 2, G)
        assert float(src.s_dx) == pytest.approx(-1e-3)

    def test_friction_off(self):
        """Test the friction source vanishes without friction, flow or water"""
        assert float(source_fric(state(1.0, 1.0), state(1.0, 1.0), 0.1, np.inf, 0.0, 7.0 / 3.0, 0).s_dx) == 0.0
        assert float(source_fric(state(1.0), state(2.0), 0.1, np.inf, 1.0, 7.0 / 3.0, 0).s_dx) == 0.0
        assert float(source_fric(state(0.0), state(1.0, 1.0), 0.1, np.inf, 1.0, 7.0 / 3.0, 0).s_dx) == 0.0


class TestIntermediateStates:
    """Test the intermediate states and the flux"""

    def test_lake_at_rest_random(self, rng):
        """Test lake-at-rest pairs keep their heights and give zero discharge"""
        n = 10000
        level = rng.uniform(1.0, 3.0, n)
        zl = rng.uniform(0.0, 0.9, n)
        zr = rng.uniform(0.0, 0.9, n)
        wl, wr = state(level - zl, np.zeros(n)), state(level - zr, np.zeros(n))
        sp = wave_speeds(wl, wr, G)
        star = intermediate_states(wl, wr, sp, hll_means(wl, wr, sp, G), source_topo(wl, wr, zl, zr, 0.1, np.inf, G))
        assert np.allclose(star.h_l_star, wl.h, rtol=1e-12, atol=1e-12)
        assert np.allclose(star.h_r_star, wr.h, rtol=1e-12, atol=1e-12)
        assert np.allclose(star.q_star, 0.0, atol=1e-11)

    def test_emerged_bank(self):
        """Test a lake against an emerged dry bank"""
        wl, wr = state(1.0), state(0.0)
        sp = wave_speeds(wl, wr, G)
        star = intermediate_states(wl, wr, sp, hll_means(wl, wr, sp, G), source_topo(wl, wr, 0.0, 2.0, 0.1, np.inf, G))
        assert float(star.h_l_star) == pytest.approx(1.0)
        assert float(star.h_r_star) == pytest.approx(0.0, abs=1e-14)
        assert float(star.q_star) == pytest.approx(0.0, abs=1e-12)

    def test_positivity_random(self, rng):
        """Test intermediate heights stay non-negative for arbitrary data"""
        n = 10000
        wl = state(rng.uniform(1e-3, 2.0, n), rng.uniform(-3.0, 3.0, n))
        wr = state(rng.uniform(1e-3, 2.0, n), rng.uniform(-3.0, 3.0, n))
        zl, zr = rng.uniform(0.0, 1.0, n), rng.uniform(0.0, 1.0, n)
        sp = wave_speeds(wl, wr, G)
        src = source_topo(wl, wr, zl, zr, 0.1, 0.5, G) + source_fric(wl, wr, 0.1, 0.5, 1.0, 7.0 / 3.0, 0, G)
        star = intermediate_states(wl, wr, sp, hll_means(wl, wr, sp, G), src)
        assert np.all(star.h_l_star >= 0.0)
        assert np.all(star.h_r_star >= 0.0)

    def test_flux_lake_at_rest(self):
        """Test the flux for a lake pair balances the hydrostatic term"""
        params = PhysParams(g=G)
        res = numerical_flux(state(1.0), state(0.5), 0.0, 0.5, 0.1, params, np.inf)
        f_h, f_n, f_t = res.flux
        assert float(f_h) == pytest.approx(0.0, abs=1e-12)
        assert float(f_t) == pytest.approx(0.0, abs=1e-12)
        assert float(f_n) == pytest.approx(0.25 * G * (1.0 + 0.25), rel=1e-12)

    def test_consistent_flux(self):
        """Test equal states on flat ground give the physical flux"""
        params = PhysParams(g=G)
        s = state(1.5, 0.7, -0.3)
        res = numerical_flux(s, s, 0.0, 0.0, 0.1, params, np.inf)
        assert float(res.flux[0]) == pytest.approx(0.7)
        assert float(res.flux[1]) == pytest.approx(0.7 ** 2 / 1.5 + 0.5 * G * 1.5 ** 2)
        assert float(res.flux[2]) == pytest.approx(0.7 * -0.3 / 1.5)
