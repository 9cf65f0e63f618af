"""Tests for the kernel bounds, the identity checks and the diagnostics."""

import math
import os
import unittest

import numpy as np

from src.domain.fields import ScatteringData
from src.domain.grids import SphereGrid
from src.errors import ConfigError
from src.models import AnalyticPotential, GaussianTerm, RunConfig
from src.potentials import born_f
from src.verify import (
    bound_sweep,
    cauchy_green_check,
    cutoff_split_report,
    diagnostics_report,
    holder_norm,
    kernel_bound_check,
    run_suite,
    weighted_bound_check,
)
from src.verify.bounds import weighted_bound_sides
from src.verify.suites import dbar_points

SMALL = RunConfig(n_sphere=4)


class TestKernelBounds(unittest.TestCase):
    """Test the closed-form bounds on A and B."""

    def test_small_sweep(self):
        """Every random (r, psi) sample satisfies the bounds."""
        for check in bound_sweep(n_samples=20, seed=1):
            self.assertTrue(check.passed, f"margin {check.margin} at {check.details['r']}, {check.details['psi']}")

    def test_origin_values(self):
        """At r = 0 the integrals are 2 pi and 4."""
        check = kernel_bound_check(0.0, 0.7)
        self.assertAlmostEqual(check.details["A"], 2.0 * math.pi, places=8)
        self.assertAlmostEqual(check.details["B"], 4.0, places=8)
        self.assertTrue(check.passed)

    def test_invalid_parameters(self):
        """Negative r and small exponents are rejected."""
        with self.assertRaises(ValueError):
            kernel_bound_check(-1.0, 0.1)
        with self.assertRaises(ValueError):
            kernel_bound_check(1.0, 0.1, alpha=1.5)
        with self.assertRaises(ValueError):
            weighted_bound_check(0.0, 0.1, 4.0, 0.5)

    def test_weighted_at_zero_rho(self):
        """With rho = 0 the B-side left terms vanish and the check passes."""
        lhs, _ = weighted_bound_sides(0.5, 0.0, 4.0, 0.5)
        self.assertEqual(lhs[4:8], [0.0, 0.0, 0.0, 0.0])
        self.assertTrue(weighted_bound_check(0.5, 0.0, 4.0, 0.5).passed)


class TestIdentities(unittest.TestCase):
    """Test the Cauchy-Green checks and the suite runner."""

    def test_cauchy_green(self):
        """The defect shrinks under refinement for every test function."""
        for check in cauchy_green_check():
            self.assertTrue(check.passed, f"{check.name}: {check.details}")

    def test_unknown_suite(self):
        """Unknown suite names are a configuration error."""
        with self.assertRaises(ConfigError):
            run_suite("nope", SMALL)

    def test_coords_suite(self):
        """The chart suite passes with the default config."""
        report = run_suite("coords", RunConfig())
        self.assertEqual(report.suite, "coords")
        self.assertTrue(report.passed)
        self.assertTrue(report.dict_for_json()["passed"])

    def test_holder_norm_constant(self):
        """A constant has Holder norm equal to its modulus."""
        points = np.random.default_rng(0).normal(size=(6, 3))
        self.assertAlmostEqual(holder_norm(np.full(6, 2.0), points, 0.5), 2.0)

    def test_dbar_sample_points(self):
        """Twenty samples off T, half inside the disk, with p orthogonal to nu in the ball."""
        samples = dbar_points(SMALL)
        self.assertEqual(len(samples), 20)
        radii = np.array([abs(lam) for lam, _ in samples])
        self.assertEqual(int(np.sum(radii < 1.0)), 10)
        self.assertGreater(np.min(np.abs(radii - 1.0)), 0.1)
        for _, p in samples:
            self.assertAlmostEqual(float(p @ np.asarray(SMALL.nu)), 0.0, places=12)
            self.assertLess(np.linalg.norm(p), SMALL.ball_radius)

    def test_cutoff_split_is_report_only(self):
        """Cutoff split entries carry the remainder and are marked as report-only."""
        cfg = RunConfig(n_phi=4, oracle_n_s=4, oracle_n_beta=4, oracle_n_psi=4)
        pot = AnalyticPotential(terms=[GaussianTerm(amplitude=0.1, width=1.0)])
        checks = cutoff_split_report(pot, cfg, dbar_points(cfg)[:2])
        self.assertEqual(len(checks), 2)
        for check in checks:
            self.assertEqual(check.name, "cutoff_split_report")
            self.assertTrue(check.details["report_only"])
            self.assertTrue(check.passed)
            self.assertGreaterEqual(check.details["remainder"], 0.0)


class TestDiagnostics(unittest.TestCase):
    """Test the measured contraction surrogates."""

    def setUp(self):
        self.grid = SphereGrid(SMALL.E, SMALL.n_sphere)
        pot = AnalyticPotential(terms=[GaussianTerm(amplitude=0.05, width=1.0)])
        self.data = born_f(pot, self.grid)

    def test_zero_data(self):
        """Zero f has zero ratios and passes."""
        zero = ScatteringData(SMALL.E, self.grid, np.zeros((len(self.grid), len(self.grid))))
        report = diagnostics_report(zero, SMALL)
        self.assertEqual(report.N_hat, 0.0)
        self.assertEqual(report.delta1_hat, 0.0)
        self.assertEqual(report.r2, 0.0)
        self.assertIsNone(report.r1)
        self.assertTrue(report.contraction_ok)

    def test_scaling(self):
        """Doubling f doubles N and both delta surrogates."""
        one = diagnostics_report(self.data, SMALL)
        two = diagnostics_report(self.data.with_values(2.0 * self.data.f), SMALL)
        self.assertAlmostEqual(two.N_hat, 2.0 * one.N_hat, places=12)
        self.assertAlmostEqual(two.delta1_hat, 2.0 * one.delta1_hat, places=12)
        self.assertAlmostEqual(two.delta2_hat, 2.0 * one.delta2_hat, places=10)
        self.assertAlmostEqual(one.r2, 2.0 ** (SMALL.mu / 2) * one.N_hat)

    def test_large_data_fails(self):
        """A huge constant f violates the smallness conditions."""
        big = ScatteringData(SMALL.E, self.grid, np.full((len(self.grid), len(self.grid)), 100.0))
        report = diagnostics_report(big, SMALL)
        self.assertGreater(report.delta1_hat, 1.0)
        self.assertFalse(report.contraction_ok)

    def test_r1_with_c4(self):
        """r1 is reported once a bracket constant is supplied."""
        report = diagnostics_report(self.data, SMALL, c4_hat=1.0, c5=math.pi / 2)
        self.assertIsNotNone(report.r1)
        self.assertGreaterEqual(report.r1, 2.0 * 2.0 ** (SMALL.mu / 2) * report.N_hat)


@unittest.skipUnless(os.getenv("ISCT_SLOW_TESTS") == "1", "set ISCT_SLOW_TESTS=1 to run")
class TestDbarSuite(unittest.TestCase):
    """The d-bar residual of the complex-k oracle on the default coarse case."""

    def test_dbar_suite_passes(self):
        """Every sample is within 10% and the residual does not grow under refinement."""
        report = run_suite("dbar", RunConfig())
        residuals = [c for c in report.checks if c.name == "dbar_residual"]
        self.assertEqual(len(residuals), 20)
        refinement = [c for c in report.checks if c.name == "dbar_refinement"]
        self.assertEqual(len(refinement), 1)
        for check in report.checks:
            self.assertTrue(check.passed, f"{check.name}: {check.details}")


if __name__ == "__main__":
    unittest.main()
