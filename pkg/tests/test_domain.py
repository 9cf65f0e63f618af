"""Tests for grids, fields, weighted norms and the run configuration."""

import json
import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.domain import build_grids
from src.domain.fields import ComplexField2D, ScatteringData
from src.domain.grids import LambdaGrid, PGrid, SphereGrid
from src.domain.norms import sup_norm_ME, triple_norm, weighted_sup_norm_p
from src.errors import ConfigError, CorruptFieldError, DimensionMismatchError, GridError
from src.models import RunConfig


class TestSphereGrid(unittest.TestCase):
    """Test the product quadrature on the energy sphere."""

    def test_nodes_on_sphere(self):
        """Every node has |m|^2 = E."""
        grid = SphereGrid(4.0, 6)
        np.testing.assert_allclose(np.sum(grid.nodes**2, axis=1), 4.0, rtol=1e-10)

    def test_weights_sum_to_area(self):
        """Weights integrate the constant 1 to 4 pi E."""
        grid = SphereGrid(9.0, 5)
        self.assertAlmostEqual(np.sum(grid.weights) / (4.0 * math.pi * 9.0), 1.0, delta=1e-6)

    def test_antipodal_pairs(self):
        """Every node has its antipode on the grid."""
        grid = SphereGrid(4.0, 4)
        anti = grid.antipode_index()
        np.testing.assert_allclose(grid.nodes[anti], -grid.nodes, atol=1e-12)

    def test_barycentric_reproduces_constants(self):
        """Interpolation weights are non-negative and sum to one for any direction."""
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(3000, 3))
        for n_sphere in (4, 6, 8, 12):
            grid = SphereGrid(4.0, n_sphere)
            W = grid.interpolation_matrix(pts)
            self.assertTrue(np.all(W >= 0), f"n_sphere={n_sphere}")
            np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)

    def test_barycentric_reproduces_linear_functions(self):
        """The interpolant of x, y, z lies on the hull facet through the direction."""
        grid = SphereGrid(1.0, 6)
        rng = np.random.default_rng(2)
        u = rng.normal(size=(500, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        W = grid.interpolation_matrix(u)
        on_facet = W @ grid.directions
        # the facet point is a positive multiple of the direction, inside the ball
        cos = np.sum(on_facet * u, axis=1) / np.linalg.norm(on_facet, axis=1)
        np.testing.assert_allclose(cos, 1.0, atol=1e-10)
        self.assertTrue(np.all(np.linalg.norm(on_facet, axis=1) <= 1.0 + 1e-12))

    def test_barycentric_at_nodes_and_poles(self):
        """Nodes interpolate to themselves and the poles are covered."""
        grid = SphereGrid(4.0, 4)
        W = grid.interpolation_matrix(grid.nodes)
        np.testing.assert_allclose(W, np.eye(len(grid)), atol=1e-9)
        poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        Wp = grid.interpolation_matrix(poles)
        self.assertTrue(np.all(Wp >= 0))
        np.testing.assert_allclose(Wp.sum(axis=1), 1.0, atol=1e-12)

    def test_bad_energy(self):
        """Non-positive energy is rejected."""
        with self.assertRaises(GridError):
            SphereGrid(0.0, 4)


class TestPGrid(unittest.TestCase):
    """Test the p-lattice inside the ball."""

    def test_nodes_inside_ball_and_off_tube(self):
        """Nodes lie strictly inside the ball and outside the tube around L_nu."""
        nu = np.array([0.0, 0.0, 1.0])
        grid = PGrid(2.0, 8, nu, 0.1)
        norms = np.linalg.norm(grid.nodes, axis=1)
        perp = grid.nodes - np.outer(grid.nodes @ nu, nu)
        self.assertTrue(np.all(norms < 2.0))
        self.assertTrue(np.all(np.linalg.norm(perp, axis=1) > 0.1))

    def test_fill_ball_keeps_node_values(self):
        """Ball filling maps node values onto themselves."""
        grid = PGrid(2.0, 6, np.array([0.0, 0.0, 1.0]), 0.5)
        values = np.arange(len(grid), dtype=float)
        filled = grid.fill_ball(values)
        self.assertEqual(len(filled), len(grid.ball_nodes))
        self.assertTrue(set(np.unique(filled)) <= set(values))


class TestLambdaGrid(unittest.TestCase):
    """Test the polar grid in the lambda plane."""

    def test_no_node_on_circle(self):
        """Inner and outer rings keep eps_T away from T."""
        grid = LambdaGrid(16, 4, 0.05, 20.0, 0.02)
        r = np.abs(grid.nodes)
        self.assertTrue(np.all(np.abs(r - 1.0) >= 0.02 - 1e-12))
        self.assertTrue(np.all(r > 0))

    def test_inner_area(self):
        """Inner weights integrate 1 to the annulus area."""
        grid = LambdaGrid(16, 3, 0.05, 20.0, 0.02)
        exact = math.pi * (0.98**2 - 0.05**2)
        self.assertAlmostEqual(np.sum(grid.inner_weights) / exact, 1.0, delta=1e-6)

    def test_stencil_weights_sum_to_one(self):
        """The log-polar stencil is a partition of unity."""
        grid = LambdaGrid(16, 4)
        _, w = grid.stencil(np.array([0.3 + 0.1j, 2.5 - 1.0j, -0.7j]))
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


class TestNorms(unittest.TestCase):
    """Test the weighted sup norms."""

    def setUp(self):
        self.cfg = RunConfig(n_p=6)
        _, self.p_grid, self.lambda_grid = build_grids(self.cfg)

    def test_zero_field(self):
        """The zero field has norm 0."""
        self.assertEqual(weighted_sup_norm_p(np.zeros(len(self.p_grid)), self.p_grid, 2.0), 0.0)

    def test_weight_cancels(self):
        """w = (1+|p|)^-mu0 has norm 1."""
        w = (1.0 + np.linalg.norm(self.p_grid.nodes, axis=1)) ** -2.0
        self.assertAlmostEqual(weighted_sup_norm_p(w, self.p_grid, 2.0), 1.0, places=12)

    def test_direct_scan(self):
        """The norm equals a brute-force scan over nodes."""
        p = self.p_grid.nodes
        w = np.exp(-np.sum(p**2, axis=1))
        expected = max((1.0 + np.linalg.norm(x)) ** 2 * np.exp(-x @ x) for x in p)
        self.assertAlmostEqual(weighted_sup_norm_p(w, self.p_grid, 2.0), expected, places=12)

    def test_corrupt_field(self):
        """Non-finite entries raise."""
        w = np.zeros(len(self.p_grid))
        w[0] = np.nan
        with self.assertRaises(CorruptFieldError):
            weighted_sup_norm_p(w, self.p_grid, 2.0)

    def test_triple_norm_scaling(self):
        """triple_norm is absolutely homogeneous."""
        rng = np.random.default_rng(0)
        shape = (len(self.lambda_grid.nodes), len(self.p_grid))
        U = ComplexField2D(rng.normal(size=shape) + 1j * rng.normal(size=shape), self.lambda_grid, self.p_grid)
        self.assertAlmostEqual(triple_norm(U * 2.0, 3.0), 2.0 * triple_norm(U, 3.0), places=10)

    def test_sup_norm_ME_constant(self):
        """For constant f the maximum sits at antipodal pairs, |k - l|^2 = 4E."""
        grid = SphereGrid(4.0, 4)
        data = ScatteringData(4.0, grid, np.full((len(grid), len(grid)), 0.5))
        self.assertAlmostEqual(sup_norm_ME(data, 2.0), 0.5 * (1.0 + 16.0), places=9)


class TestFields(unittest.TestCase):
    """Test field containers."""

    def test_dimension_mismatch(self):
        """Scattering matrices must match the grid."""
        grid = SphereGrid(4.0, 4)
        with self.assertRaises(DimensionMismatchError):
            ScatteringData(4.0, grid, np.zeros((3, 3)))

    def test_values_are_read_only(self):
        """Stored arrays cannot be modified in place."""
        grid = SphereGrid(4.0, 4)
        data = ScatteringData(4.0, grid, np.zeros((len(grid), len(grid))))
        with self.assertRaises(ValueError):
            data.f[0, 0] = 1.0


class TestRunConfig(unittest.TestCase):
    """Test configuration loading and validation."""

    def test_defaults_valid(self):
        """The default config satisfies every invariant."""
        cfg = RunConfig()
        self.assertTrue(0 < cfg.tau < 1)
        self.assertAlmostEqual(cfg.ball_radius, 2.0 * cfg.tau * math.sqrt(cfg.E))

    def test_invalid_override(self):
        """Overrides are validated."""
        with self.assertRaises(ConfigError):
            RunConfig().with_overrides(tau=1.5)
        with self.assertRaises(ConfigError):
            RunConfig().with_overrides(mu0=5.0, mu=4.0)
        with self.assertRaises(ConfigError):
            RunConfig().with_overrides(nu=(1.0, 1.0, 0.0))

    def test_missing_file(self):
        """A missing config file is a ConfigError naming the problem."""
        with self.assertRaises(ConfigError) as ctx:
            RunConfig.from_json("/nonexistent/config.json")
        self.assertIn("config not found", str(ctx.exception))

    def test_from_json(self):
        """A flat JSON object loads into the model."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "cfg.json"
            path.write_text(json.dumps({"E": 9.0, "tau": 0.4}), encoding="utf-8")
            cfg = RunConfig.from_json(str(path))
        self.assertEqual(cfg.E, 9.0)
        self.assertEqual(cfg.tau, 0.4)

    def test_unknown_field(self):
        """Unknown JSON keys are rejected."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "cfg.json"
            path.write_text(json.dumps({"energy": 9.0}), encoding="utf-8")
            with self.assertRaises(ConfigError):
                RunConfig.from_json(str(path))

    def test_config_hash(self):
        """Changing tau changes the config hash."""
        cfg = RunConfig()
        self.assertEqual(cfg.config_hash(), RunConfig().config_hash())
        self.assertNotEqual(cfg.config_hash(), cfg.with_overrides(tau=0.4).config_hash())


if __name__ == "__main__":
    unittest.main()
