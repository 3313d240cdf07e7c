"""
Tests for the least-squares polynomial reconstruction
"""
import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from src.exceptions import ConfigError, ReconstructionError
from src.reconstruction import (
    build_plan, curvatures, evaluate, gauss_nodes, gradient, multi_indices, reconstruct_field,
    reconstruct_topography, stencil_offsets, stencil_radius,
)

DX, DY = 0.1, 0.08


def random_polynomial(rng, degree):
    """Callable polynomial with random coefficients for every monomial up to the degree"""
    terms = [(0, 0)] + list(multi_indices(degree))
    coeffs = rng.uniform(-1.0, 1.0, len(terms)) / np.array([DX ** a * DY ** b for a, b in terms])

    def poly(x, y):
        return sum(c * x ** a * y ** b for c, (a, b) in zip(coeffs, terms))

    return poly


def averages_around(func, radius):
    """Exact cell averages on a (2r+1)^2 block centred on the cell at the origin"""
    nodes, weights = leggauss(6)
    weights = weights / weights.sum()
    offsets = np.arange(-radius, radius + 1)
    xc, yc = np.meshgrid(offsets * DX, offsets * DY)
    total = np.zeros_like(xc)
    for a, wa in zip(nodes, weights):
        for b, wb in zip(nodes, weights):
            total += wa * wb * func(xc + 0.5 * a * DX, yc + 0.5 * b * DY)
    return total


def center_block(radius):
    return slice(radius, radius + 1), slice(radius, radius + 1)


class TestStencils:
    """Test stencil families"""

    @pytest.mark.parametrize('degree, size', [(1, 4), (2, 8), (3, 12), (4, 24), (5, 28)])
    def test_sizes(self, degree, size):
        """Test stencil sizes per degree"""
        assert len(stencil_offsets(degree)) == size

    def test_nested(self):
        """Test each stencil contains the previous one"""
        for degree in range(2, 6):
            lower = {tuple(o) for o in stencil_offsets(degree - 1)}
            higher = {tuple(o) for o in stencil_offsets(degree)}
            assert lower <= higher

    def test_radius(self):
        """Test stencil radii"""
        assert [stencil_radius(d) for d in range(6)] == [0, 1, 1, 2, 2, 3]

    def test_unknown_degree(self):
        """Test degrees outside the supported range are refused"""
        with pytest.raises(ConfigError):
            stencil_offsets(6)
        with pytest.raises(ConfigError):
            build_plan(0, DX, DY)


class TestGaussRule:
    """Test the quadrature rules"""

    @pytest.mark.parametrize('degree, n', [(0, 1), (1, 1), (2, 2), (3, 2), (4, 3), (5, 3)])
    def test_node_count(self, degree, n):
        """Test the number of edge nodes grows with the degree"""
        rule = gauss_nodes(degree)
        assert rule.n == n
        assert rule.weights.sum() == pytest.approx(1.0)
        assert rule.cell_weights.sum() == pytest.approx(1.0)
        assert len(rule.cell_nodes) == n * n

    def test_two_point_nodes(self):
        """Test the two-point rule nodes"""
        assert sorted(gauss_nodes(2).nodes) == pytest.approx([-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)])


class TestReconstruction:
    """Test exactness and conservation of the reconstruction"""

    @pytest.mark.parametrize('degree', [1, 2, 3, 4, 5])
    def test_polynomial_exactness(self, rng, degree):
        """Test polynomials of the degree are reproduced"""
        func = random_polynomial(rng, degree)
        plan = build_plan(degree, DX, DY)
        radius = plan.radius
        field = averages_around(func, radius)
        poly = reconstruct_field(plan, field, *center_block(radius))
        for ox, oy in [(0.0, 0.0), (0.3 * DX, -0.2 * DY), (0.5 * DX, 0.5 * DY), (-0.5 * DX, 0.1 * DY)]:
            assert float(evaluate(poly, plan, ox, oy)[0, 0]) == pytest.approx(float(func(ox, oy)), abs=1e-8)

    @pytest.mark.parametrize('degree', [1, 2, 3, 4, 5])
    def test_conservation(self, rng, degree):
        """Test the reconstruction averages back to the cell mean on arbitrary data"""
        plan = build_plan(degree, DX, DY)
        size = 2 * plan.radius + 1
        field = rng.uniform(0.0, 1.0, (size, size))
        poly = reconstruct_field(plan, field, *center_block(plan.radius))
        nodes, weights = leggauss(4)
        weights = weights / weights.sum()
        mean = sum(
            wa * wb * float(evaluate(poly, plan, 0.5 * a * DX, 0.5 * b * DY)[0, 0])
            for a, wa in zip(nodes, weights)
            for b, wb in zip(nodes, weights)
        )
        assert mean == pytest.approx(field[plan.radius, plan.radius], abs=1e-12)

    def test_rank_deficient_stencil(self):
        """Test the radius-2 ring cannot carry a degree-5 polynomial"""
        with pytest.raises(ReconstructionError):
            build_plan(5, DX, DY, stencil=stencil_offsets(4))

    def test_linear_gradient(self):
        """Test the gradient of a linear field"""
        plan = build_plan(1, DX, DY)
        field = averages_around(lambda x, y: 2.0 + 3.0 * x - 4.0 * y, 1)
        poly = reconstruct_field(plan, field, *center_block(1))
        gx, gy = gradient(poly, plan, 0.2 * DX, 0.1 * DY)
        assert float(gx[0, 0]) == pytest.approx(3.0)
        assert float(gy[0, 0]) == pytest.approx(-4.0)

    def test_curvatures(self):
        """Test second derivatives of a quadratic field"""
        plan = build_plan(2, DX, DY)
        field = averages_around(lambda x, y: 1.0 + 3.0 * x ** 2 - 2.0 * y ** 2 + x * y, 1)
        poly = reconstruct_field(plan, field, *center_block(1))
        cxx, cyy = curvatures(poly, plan)
        assert float(cxx[0, 0]) == pytest.approx(6.0)
        assert float(cyy[0, 0]) == pytest.approx(-4.0)

    def test_curvatures_need_degree_two(self):
        """Test curvatures refuse other degrees"""
        plan = build_plan(3, DX, DY)
        field = np.ones((5, 5))
        with pytest.raises(ConfigError):
            curvatures(reconstruct_field(plan, field, *center_block(2)), plan)

    def test_flat_topography(self, rng):
        """Test equal reconstructions of h and h+Z up to a constant give a flat bottom"""
        plan = build_plan(3, DX, DY)
        h = rng.uniform(1.0, 2.0, (5, 5))
        h_poly = reconstruct_field(plan, h, *center_block(2))
        hz_poly = reconstruct_field(plan, h + 0.7, *center_block(2))
        z_poly = reconstruct_topography(h_poly, hz_poly)
        assert np.allclose(z_poly.coeffs, 0.0, atol=1e-9)
        assert float(z_poly.mean[0, 0]) == pytest.approx(0.7)

    def test_whole_block(self, rng):
        """Test block reconstruction shapes"""
        plan = build_plan(2, DX, DY)
        field = rng.uniform(size=(7, 9))
        poly = reconstruct_field(plan, field, slice(1, 6), slice(1, 8))
        assert poly.mean.shape == (5, 7)
        assert poly.coeffs.shape == (len(plan.alphas), 5, 7)

    def test_stencil_outside_frame(self):
        """Test blocks too close to the array edge are refused"""
        plan = build_plan(2, DX, DY)
        with pytest.raises(ConfigError):
            reconstruct_field(plan, np.ones((4, 4)), slice(0, 2), slice(1, 3))
