"""Quadrature grids, spectral panel operators, and interval truncation."""

import math

import numpy as np
import pytest
import scipy.integrate

from semisep.errors import ContractError, DomainError, TruncationError
from semisep.quadrature import (
    GAUSS,
    TRAPEZOID,
    build_grid,
    build_grid_from_edges,
    truncate_interval,
)


class TestBuildGrid:
    def test_two_point_gauss(self):
        g = build_grid((0, 1), 2, 1)
        expected = [0.5 - 1 / (2 * math.sqrt(3)), 0.5 + 1 / (2 * math.sqrt(3))]
        assert np.allclose(g.nodes, expected, atol=1e-15)
        assert np.allclose(g.weights, [0.5, 0.5])

    def test_two_panels(self):
        g = build_grid((0, 2), 2, 2)
        assert g.size == 4
        assert abs(g.weights.sum() - 2.0) < 1e-14

    def test_x_squared_three_point(self):
        g = build_grid((0, 1), 3, 1)
        assert abs(g.integrate(g.nodes**2) - 1 / 3) < 1e-15

    def test_weight_sum_and_interiority(self):
        g = build_grid((-2.5, 4.0), 12, 7)
        assert abs(g.weights.sum() - 6.5) <= 1e-12 * 6.5
        assert g.nodes.min() > -2.5 and g.nodes.max() < 4.0
        assert np.all(np.diff(g.nodes) > 0)
        assert np.all(g.weights > 0)

    def test_gauss_exactness(self):
        rng = np.random.default_rng(0)
        n = 9
        g = build_grid((0.25, 1.75), n, 3)
        coeffs = rng.uniform(-1, 1, 2 * n)  # degree 2n-1
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(1.75) - poly.integ()(0.25)
        assert abs(g.integrate(poly(g.nodes)) - exact) <= 1e-13 * max(1, abs(exact))

    def test_refinement_monotonicity(self):
        for f, exact in [
            (np.exp, np.e - 1),
            (lambda x: np.sin(5 * x), (1 - np.cos(5)) / 5),
            (lambda x: 1 / (1 + x**2), np.arctan(1)),
        ]:
            errs = []
            for panels in (1, 2, 4):
                g = build_grid((0, 1), 4, panels)
                errs.append(abs(g.integrate(f(g.nodes)) - exact))
            assert errs[1] <= errs[0] + 1e-15
            assert errs[2] <= errs[1] + 1e-15

    def test_trapezoid_scheme(self):
        g = build_grid((0, 1), 5, 3, scheme=TRAPEZOID)
        assert abs(g.weights.sum() - 1.0) < 1e-12
        assert np.all(np.diff(g.nodes) > 0)
        # exact on affine functions
        assert abs(g.integrate(2 * g.nodes + 1) - 2.0) < 1e-13

    def test_infinite_endpoint_rejected(self):
        with pytest.raises(DomainError, match="truncate"):
            build_grid((0, math.inf), 4, 2)

    def test_bad_edges_rejected(self):
        with pytest.raises(DomainError):
            build_grid_from_edges([0.0, 0.0, 1.0])

    def test_refined_keeps_edges(self):
        g = build_grid_from_edges([0.0, 0.3, 1.0], 6)
        g2 = g.refined(2)
        assert g2.size == 2 * g.size
        assert 0.3 in g2.panel_edges


class TestPanelOperators:
    def test_cumulative_matches_quad(self):
        g = build_grid((0, 2), 16, 4)
        vals = np.exp(g.nodes)
        cum = g.cumulative(vals)
        assert np.abs(cum - (np.exp(g.nodes) - 1.0)).max() < 1e-13

    def test_cumulative_stacked(self):
        g = build_grid((0, 1), 8, 2)
        vals = np.stack([np.vstack([x**2, np.cos(x)]).reshape(2, 1) for x in g.nodes])
        cum = g.cumulative(vals)
        assert np.abs(cum[:, 0, 0] - g.nodes**3 / 3).max() < 1e-14
        assert np.abs(cum[:, 1, 0] - np.sin(g.nodes)).max() < 1e-14

    def test_differentiate(self):
        g = build_grid((0, 1), 16, 4)
        d = g.differentiate(np.sin(3 * g.nodes))
        assert np.abs(d - 3 * np.cos(3 * g.nodes)).max() < 1e-9

    def test_spectral_ops_need_gauss(self):
        g = build_grid((0, 1), 5, 2, scheme=TRAPEZOID)
        with pytest.raises(ContractError):
            g.cumulative(np.ones(g.size))


class TestTruncation:
    def test_exponential_tail_closed_form(self):
        rep = truncate_interval(lambda x: math.exp(-x), (0, math.inf), 1e-8)
        # minimal cutoff solves exp(-b) = tol
        assert abs(rep.truncated_interval[1] - (-math.log(1e-8))) < 0.05
        assert rep.tail_mass <= 1e-8

    def test_finite_interval_unchanged(self):
        rep = truncate_interval(lambda x: 0.0, (0.0, 5.0), 1e-10)
        assert rep.truncated_interval == (0.0, 5.0)
        assert rep.tail_mass == 0.0

    def test_power_tail(self):
        # oracle: tail of (1+x)^-4 is (1+b)^-3/3; solve for tol 1e-6
        oracle_b = (1e6 / 3) ** (1 / 3) - 1
        rep = truncate_interval(lambda x: (1 + x) ** -4, (0, math.inf), 1e-6)
        assert abs(rep.truncated_interval[1] - oracle_b) < 0.1
        assert rep.tail_mass <= 1e-6

    def test_symmetric_real_line(self):
        rep = truncate_interval(lambda x: math.exp(-x * x), (-math.inf, math.inf), 1e-9)
        a, b = rep.truncated_interval
        assert a < 0 < b
        assert abs(a + b) < 0.05
        assert rep.tail_mass <= 1e-9

    def test_non_integrable_envelope(self):
        with pytest.raises(TruncationError):
            truncate_interval(lambda x: 1.0 / (1.0 + abs(x)), (0, math.inf), 1e-6)

    def test_invalid_tol(self):
        with pytest.raises(DomainError):
            truncate_interval(lambda x: 0.0, (0, math.inf), -1.0)

    def test_gauss_scheme_constant(self):
        assert GAUSS == "gauss-legendre"
