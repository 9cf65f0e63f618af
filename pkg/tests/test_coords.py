"""Tests for the (lambda, p) chart and the frame."""

import math
import unittest

import numpy as np

from src.coords import (
    abs_im_k,
    abs_re_k,
    cdot,
    frame_of,
    gamma_pm,
    gamma_pm_expansion,
    k_from_lambda,
    lambda_from_k,
    xi_circle,
)
from src.errors import DegenerateFrameError, OutsideBallError
from src.models import RunConfig
from src.verify.identities import coordinate_checks


class TestChart(unittest.TestCase):
    """Test k(lambda, p) and its inverse."""

    def setUp(self):
        self.E = 4.0
        self.nu = np.array([0.0, 0.0, 1.0])
        self.p = np.array([0.6, -0.3, 0.4])
        self.frame = frame_of(self.p, self.nu)

    def test_round_trip(self):
        """lambda -> k -> lambda is the identity."""
        for lam in (0.3 + 0.2j, 1j, 3.0 - 4.0j):
            k = k_from_lambda(lam, self.p, self.E, self.frame)
            self.assertAlmostEqual(abs(lambda_from_k(k, self.p, self.frame) - lam) / abs(lam), 0.0, places=12)

    def test_variety_equations(self):
        """k.k = E and p.p = 2 k.p."""
        k = k_from_lambda(0.5 - 0.7j, self.p, self.E, self.frame).k
        self.assertAlmostEqual(abs(cdot(k, k) - self.E), 0.0, places=12)
        self.assertAlmostEqual(abs(self.p @ self.p - 2.0 * cdot(k, self.p)), 0.0, places=12)

    def test_closed_forms(self):
        """|Im k| and |Re k| match their closed forms."""
        lam = 0.4 + 0.1j
        k = k_from_lambda(lam, self.p, self.E, self.frame).k
        pn = np.linalg.norm(self.p)
        self.assertAlmostEqual(np.linalg.norm(k.imag), abs_im_k(np.array([lam]), pn, self.E)[0], places=12)
        self.assertAlmostEqual(np.linalg.norm(k.real), abs_re_k(np.array([lam]), pn, self.E)[0], places=12)

    def test_real_on_unit_circle(self):
        """|lambda| = 1 gives real k."""
        k = k_from_lambda(np.exp(0.7j), self.p, self.E, self.frame).k
        self.assertLess(np.linalg.norm(k.imag), 1e-10 * math.sqrt(self.E))

    def test_gamma_expansion(self):
        """gamma+ matches its frame expansion and is a unit vector orthogonal to k."""
        lam = np.exp(1.3j)
        g_plus, g_minus = gamma_pm(lam, self.p, self.E, self.frame)
        np.testing.assert_allclose(g_plus, gamma_pm_expansion(lam, self.frame), atol=1e-12)
        np.testing.assert_allclose(g_minus, -g_plus)
        k = k_from_lambda(lam, self.p, self.E, self.frame).k.real
        self.assertAlmostEqual(np.linalg.norm(g_plus), 1.0, places=12)
        self.assertAlmostEqual(g_plus @ k, 0.0, places=12)

    def test_xi_on_characteristic_circle(self):
        """xi(phi) solves xi.xi + 2 k.xi = 0."""
        lam = 0.5 + 0.2j
        k = k_from_lambda(lam, self.p, self.E, self.frame).k
        for phi in (0.3, -1.2, 2.9):
            xi = xi_circle(lam, self.p, self.E, phi, self.frame)
            self.assertAlmostEqual(abs(cdot(xi, xi) + 2.0 * cdot(k, xi)), 0.0, places=10)

    def test_degenerate_frame(self):
        """p on L_nu has no frame."""
        with self.assertRaises(DegenerateFrameError):
            frame_of(np.array([0.0, 0.0, 0.5]), self.nu)

    def test_outside_ball(self):
        """|p| >= 2 sqrt(E) is off the chart."""
        p = np.array([4.0, 0.0, 0.0])
        with self.assertRaises(OutsideBallError):
            k_from_lambda(0.5, p, self.E, frame_of(p, self.nu))

    def test_zero_lambda(self):
        """lambda = 0 is excluded."""
        with self.assertRaises(ValueError):
            k_from_lambda(0.0, self.p, self.E, self.frame)


class TestCoordinateSuite(unittest.TestCase):
    """Test the random-sample coordinate checks."""

    def test_all_checks_pass(self):
        """1000 random samples pass every coordinate check."""
        results = coordinate_checks(RunConfig(), n_samples=1000)
        failed = [r.name for r in results if not r.passed]
        self.assertEqual(failed, [])


if __name__ == "__main__":
    unittest.main()
