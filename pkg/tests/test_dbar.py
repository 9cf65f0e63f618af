"""Tests for the bracket, the Cauchy operators and the d-bar fixed point."""

import math
import unittest
from unittest import mock

import numpy as np

from src.coords import z_coordinate
from src.dbar import (
    ConstantEvaluator,
    DbarState,
    apply_M,
    area_transform,
    bilinear_bracket,
    bracket_batch,
    boundary_limit_H0,
    c5_constant,
    cap_H0,
    cauchy_boundary_H0,
    m_kernel,
    radii,
    solve_fixed_point,
)
from src.dbar.bracket import bracket_weight
from src.domain import build_grids
from src.domain.fields import ComplexField2D
from src.domain.grids import LambdaGrid
from src.errors import CoordinateError
from src.models import RunConfig
from src.verify.identities import cauchy_monomial_checks

SMALL = RunConfig(n_sphere=4, n_lambda_circle=32, n_lambda_radial=4, n_p=4, n_phi=8)


class TestCauchy(unittest.TestCase):
    """Test the Cauchy-type integrals on the unit circle."""

    def setUp(self):
        _, self.p_grid, self.lambda_grid = build_grids(SMALL)

    def test_constant_boundary_data(self):
        """Constant boundary data gives the same constant inside and outside."""
        n = len(self.lambda_grid.circle_nodes)
        data = np.full(n, 2.0 - 1.0j)
        self.assertAlmostEqual(complex(cauchy_boundary_H0(data, data, 0.3j, self.lambda_grid)), 2.0 - 1.0j, places=10)
        self.assertAlmostEqual(complex(cauchy_boundary_H0(data, data, -3.0, self.lambda_grid)), 2.0 - 1.0j, places=10)

    def test_near_circle_rejected(self):
        """Points within eps_T of T need the boundary-limit operator."""
        n = len(self.lambda_grid.circle_nodes)
        data = np.ones(n)
        with self.assertRaises(CoordinateError):
            cauchy_boundary_H0(data, data, 1.0 + 0.5 * SMALL.eps_T, self.lambda_grid)
        with self.assertRaises(CoordinateError):
            cauchy_boundary_H0(data, data, 0.0, self.lambda_grid)

    def test_boundary_limits_of_constant(self):
        """Both one-sided limits of a constant are the constant."""
        data = np.full(32, 0.7 + 0.2j)
        for side in ("+", "-"):
            self.assertAlmostEqual(complex(boundary_limit_H0(data, 5, side, SMALL.E)), 0.7 + 0.2j, places=10)
        with self.assertRaises(ValueError):
            boundary_limit_H0(data, 0, "0", SMALL.E)

    def test_monomial_checks(self):
        """Plemelj jumps and interior values of z^m are reproduced."""
        for check in cauchy_monomial_checks(SMALL.E, n_circle=256):
            self.assertTrue(check.passed, f"{check.name}: margin {check.margin}")

    def test_m_kernel_shape(self):
        """One row and one column per lambda-node, with zero image of zero."""
        K = m_kernel(self.lambda_grid)
        n = len(self.lambda_grid.nodes)
        self.assertEqual(K.shape, (n, n))
        np.testing.assert_array_equal(K @ np.zeros(n), 0.0)

    def test_area_transform_of_disk_indicator(self):
        """-(1/pi) int_{a<|zeta|<1} dA / (zeta - lambda) = conj(lambda) - a^2 / lambda inside the annulus."""
        errors = []
        for n_radial in (6, 12):
            grid = LambdaGrid(48, n_radial, lambda_min=0.05)
            b = np.concatenate([np.ones(grid.n_inner), np.zeros(len(grid.outer_nodes))])
            out = area_transform(b, grid)
            lam = grid.inner_nodes
            exact = np.conj(lam) - 0.05**2 / lam
            band = (np.abs(lam) > 0.2) & (np.abs(lam) < 0.9)
            errors.append(float(np.mean(np.abs(out[: grid.n_inner] - exact)[band])))
            np.testing.assert_array_equal(out[grid.n_inner :], 0.0)
        self.assertLess(errors[1], errors[0])
        self.assertLess(errors[1], 0.1)

    def test_apply_M_is_quadratic(self):
        """M(2U) = 4 M(U) and M(0) = 0."""
        values = np.outer(
            np.ones(len(self.lambda_grid.nodes)), (1.0 + np.linalg.norm(self.p_grid.nodes, axis=1)) ** -2
        )
        U = ComplexField2D(1e-3 * values, self.lambda_grid, self.p_grid)
        once = apply_M(U, SMALL).values
        twice = apply_M(U * 2.0, SMALL).values
        self.assertGreater(np.max(np.abs(once)), 0.0)
        np.testing.assert_allclose(twice, 4.0 * once, rtol=1e-10, atol=1e-18)
        zero = apply_M(ComplexField2D.zeros(self.lambda_grid, self.p_grid), SMALL)
        np.testing.assert_array_equal(zero.values, 0.0)

    def test_c5_lower_bound(self):
        """c5 is at least its value pi/2 at the origin."""
        self.assertGreaterEqual(c5_constant(n_samples=8), math.pi / 2 - 1e-9)


class TestBracket(unittest.TestCase):
    """Test the quadratic bracket."""

    def setUp(self):
        nu = np.asarray(SMALL.nu)
        perp = np.cross(nu, [1.0, 0.0, 0.0])
        self.p = 0.4 * SMALL.ball_radius * perp / np.linalg.norm(perp)

    def test_bilinear(self):
        """Scaling one argument scales the bracket."""
        one = bilinear_bracket(ConstantEvaluator(1.0), ConstantEvaluator(1.0), 0.5, self.p, SMALL)
        two = bilinear_bracket(ConstantEvaluator(2.0), ConstantEvaluator(1.0), 0.5, self.p, SMALL)
        self.assertAlmostEqual(two, 2.0 * one, places=12)

    def test_zero_argument(self):
        """(0, U) = 0."""
        value = bilinear_bracket(ConstantEvaluator(0.0), ConstantEvaluator(1.0), 2.0j, self.p, SMALL)
        self.assertEqual(value, 0.0)

    def test_skipped_node_renormalizes_weights(self):
        """A dropped node is removed and the remaining weights are rescaled."""
        calls = []

        def drop_first(k, q, E, nu):
            z, ok = z_coordinate(k, q, E, nu)
            ok = np.ones_like(ok)
            if not calls:
                ok[0] = False
            calls.append(1)
            return z, ok

        lam = np.array([0.5 + 0.2j])
        with mock.patch("src.dbar.bracket.z_coordinate", side_effect=drop_first):
            values, skipped = bracket_batch(
                ConstantEvaluator(1.0), ConstantEvaluator(1.0), lam, self.p[None, :], SMALL, cutoff=False
            )
        self.assertEqual(skipped, 1)

        n = SMALL.n_phi
        phi = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
        W = bracket_weight(lam, np.array([np.linalg.norm(self.p)]), phi[None, :], SMALL.E)[0]
        kept_weight = 2.0 * np.pi / (n - 1)
        expected = -0.25 * math.pi * kept_weight * np.sum(W[1:])
        self.assertAlmostEqual(complex(values[0]), complex(expected), places=10)


class TestFixedPoint(unittest.TestCase):
    """Test the cap, the radii and the fixed-point solve."""

    def setUp(self):
        _, self.p_grid, self.lambda_grid = build_grids(SMALL)

    def test_zero_data_converges_immediately(self):
        """H0 = 0 is its own fixed point."""
        H0 = ComplexField2D.zeros(self.lambda_grid, self.p_grid)
        state = solve_fixed_point(H0, SMALL)
        self.assertIsInstance(state, DbarState)
        self.assertTrue(state.solved)
        self.assertEqual(state.diagnostics.iterations, 1)
        np.testing.assert_array_equal(state.Htilde.values, 0.0)

    def _smooth_H0(self, scale):
        decay = (1.0 + np.linalg.norm(self.p_grid.nodes, axis=1)) ** -2
        values = scale * np.outer(np.exp(-np.abs(self.lambda_grid.nodes)), decay)
        return ComplexField2D(values.astype(complex), self.lambda_grid, self.p_grid)

    def test_first_correction_is_quadratic(self):
        """The first correction M(H0) has slope 2 in the size of H0."""
        cfg = SMALL.with_overrides(fp_tol=1e-14)
        small = solve_fixed_point(self._smooth_H0(1e-5), cfg).diagnostics
        large = solve_fixed_point(self._smooth_H0(2e-5), cfg).diagnostics
        self.assertGreater(small.increments[1], 0.0)
        slope = math.log2(large.increments[1] / small.increments[1])
        self.assertAlmostEqual(slope, 2.0, places=6)
        # first ratio ||M(H0)|| / ||H0|| is linear in the size of H0
        q_small = small.increments[1] / small.increments[0]
        q_large = large.increments[1] / large.increments[0]
        self.assertAlmostEqual(q_large / q_small, 2.0, places=6)

    def test_increments_decay_geometrically(self):
        """Small Cauchy data converge with every increment ratio inside the contraction band."""
        cfg = SMALL.with_overrides(fp_tol=1e-14)
        state = solve_fixed_point(self._smooth_H0(1e-5), cfg)
        diag = state.diagnostics
        self.assertTrue(diag.converged)
        self.assertGreaterEqual(diag.iterations, 3)
        incs = np.asarray(diag.increments)
        ratios = incs[1:] / incs[:-1]
        self.assertTrue(np.all(ratios < 0.5), ratios)
        self.assertAlmostEqual(diag.contraction_estimate, float(np.max(ratios)), places=12)
        self.assertLess(diag.residual, cfg.fp_tol)
        # H~ - H0 - M(H~) is the last increment up to the contraction factor
        fixed = state.H0.values + apply_M(state.Htilde, cfg).values
        defect = np.max(np.abs(state.Htilde.values - fixed))
        self.assertLess(defect, 10.0 * cfg.fp_tol)

    def test_radii(self):
        """r2 = 2^(mu/2) N / (1 - eta); eta >= 1 makes the radii infinite."""
        r = radii(0.1, 0.5, 0.0, 0.0, math.pi / 2, SMALL)
        self.assertAlmostEqual(r.r2, 2.0 ** (SMALL.mu / 2) * 0.1 / 0.5)
        self.assertTrue(r.satisfied)
        r = radii(0.1, 1.0, 0.0, 1.0, math.pi / 2, SMALL)
        self.assertTrue(math.isinf(r.r2))
        self.assertFalse(r.satisfied)

    def test_cap_keeps_phase(self):
        """Values above B(p) are pulled onto B(p) with their phase intact."""
        shape = (len(self.lambda_grid.nodes), len(self.p_grid))
        H0 = ComplexField2D(np.full(shape, 10.0 * np.exp(0.3j)), self.lambda_grid, self.p_grid)
        capped = cap_H0(H0, 0.01, 0.0, 0.0, SMALL)
        bound = 2.0 ** (SMALL.mu / 2) * 0.01 * (1.0 + np.linalg.norm(self.p_grid.nodes, axis=1)) ** (-SMALL.mu)
        np.testing.assert_allclose(np.abs(capped.values), np.broadcast_to(bound, shape), rtol=1e-12)
        np.testing.assert_allclose(np.angle(capped.values), 0.3, atol=1e-12)

    def test_cap_leaves_small_values(self):
        """Nothing changes below the bound."""
        H0 = ComplexField2D.zeros(self.lambda_grid, self.p_grid)
        self.assertIs(cap_H0(H0, 0.01, 0.0, 0.0, SMALL), H0)


if __name__ == "__main__":
    unittest.main()
