"""Tests for the Lippmann-Schwinger solver and the complex-k oracle."""

import unittest

import numpy as np

from src.coords import frame_of, k_from_lambda
from src.domain.grids import SphereGrid
from src.forward import (
    neumann_partial_sum,
    oracle_contraction,
    reciprocity_defect,
    solve_f_LS,
    solve_f_LS_detailed,
    solve_H_complex,
    solve_H_oracle,
)
from src.forward.faddeev_complex import build_oracle_matrix
from src.forward.lippmann_schwinger import LippmannSchwingerOperator, RadialGrid3D
from src.models import AnalyticPotential, GaussianTerm, RunConfig
from src.potentials import born_f, vhat


def gaussian(amplitude, width=1.0):
    return AnalyticPotential(terms=[GaussianTerm(amplitude=amplitude, width=width)])


SMALL = RunConfig(n_sphere=4, oracle_n_s=4, oracle_n_beta=4, oracle_n_psi=4)


class TestLippmannSchwinger(unittest.TestCase):
    """Test the forward solver on small grids."""

    def setUp(self):
        self.grid = SphereGrid(SMALL.E, SMALL.n_sphere)

    def test_zero_potential(self):
        """A zero potential scatters nothing."""
        data = solve_f_LS(gaussian(0.0), self.grid, SMALL)
        np.testing.assert_array_equal(data.f, 0.0)

    def test_parity_symmetry(self):
        """f(k, l) = f(-k, -l) for an even potential."""
        data = solve_f_LS(gaussian(0.2), self.grid, SMALL)
        self.assertLess(reciprocity_defect(data), 1e-8)

    def test_born_limit(self):
        """f - v-hat(k - l) is quadratic in the amplitude."""
        errors = []
        for a in (0.04, 0.02):
            pot = gaussian(a)
            f = solve_f_LS(pot, self.grid, SMALL).f
            errors.append(np.max(np.abs(f - born_f(pot, self.grid).f)))
        self.assertGreater(errors[0] / errors[1], 3.5)
        self.assertLess(errors[0] / errors[1], 4.5)

    def test_iterates_telescope(self):
        """Neumann partial sums approach the converged solution."""
        pot = gaussian(0.2)
        result = solve_f_LS_detailed(pot, self.grid, SMALL)
        op = LippmannSchwingerOperator(pot, self.grid, RadialGrid3D.from_config(SMALL, pot))
        cols = np.arange(len(self.grid))
        err2 = np.max(np.abs(neumann_partial_sum(op, cols, 2).T - result.data.f))
        err6 = np.max(np.abs(neumann_partial_sum(op, cols, 6).T - result.data.f))
        self.assertLess(err6, err2)
        self.assertGreater(result.iterations, 1)


class TestOracle(unittest.TestCase):
    """Test the complex-k oracle operator."""

    def test_contraction_linear_in_amplitude(self):
        """Doubling the amplitude doubles the measured contraction."""
        p = np.array([0.8, 0.0, 0.0])
        k = k_from_lambda(2.0, p, SMALL.E, frame_of(p, np.asarray(SMALL.nu))).k
        q1 = oracle_contraction(gaussian(0.1), k, SMALL)
        q2 = oracle_contraction(gaussian(0.2), k, SMALL)
        self.assertGreater(q1, 0.0)
        self.assertAlmostEqual(q2 / q1, 2.0, delta=0.2)

    def test_born_limit_of_H(self):
        """H(k, p) - v-hat(p) is quadratic in the amplitude at complex k."""
        p = np.array([0.8, 0.0, 0.0])
        k = k_from_lambda(2.0, p, SMALL.E, frame_of(p, np.asarray(SMALL.nu))).k
        self.assertGreater(np.max(np.abs(k.imag)), 0.0)
        p_list = np.array([[0.0, 0.0, 0.0], [0.5, 0.3, 0.0], [1.0, 0.0, 0.4]])
        gaps = []
        for a in (0.01, 0.02):
            pot = gaussian(a)
            H = solve_H_complex(pot, k, p_list, SMALL)
            gaps.append(np.max(np.abs(H - vhat(pot, p_list))))
        self.assertGreater(gaps[0], 0.0)
        self.assertAlmostEqual(np.log2(gaps[1] / gaps[0]), 2.0, delta=0.2)

    def test_solution_matches_direct_evaluation(self):
        """solve_H_complex evaluates the converged oracle solution."""
        p = np.array([0.0, 0.6, 0.0])
        k = k_from_lambda(0.5, p, SMALL.E, frame_of(p, np.asarray(SMALL.nu))).k
        pot = gaussian(0.1)
        p_list = np.array([[0.2, 0.0, 0.1], [0.0, 0.9, 0.0]])
        sol = solve_H_oracle(pot, k, SMALL, p_list=p_list)
        self.assertGreaterEqual(sol.iterations, 2)
        self.assertLess(sol.contraction, 1.0)
        np.testing.assert_allclose(solve_H_complex(pot, k, p_list, SMALL), sol.evaluate(p_list), atol=1e-14)
        # u solves u = S - A u to the solver tolerance
        A = build_oracle_matrix(pot, sol.quad)
        residual = sol.u - (vhat(pot, -sol.quad.xi) - A @ sol.u)
        self.assertLess(np.max(np.abs(residual)), 10.0 * SMALL.ls_tol)

    def test_zero_potential_gives_zero_H(self):
        """A zero potential gives H = 0 after one step."""
        p = np.array([0.5, 0.0, 0.0])
        k = k_from_lambda(2.0, p, SMALL.E, frame_of(p, np.asarray(SMALL.nu))).k
        H = solve_H_complex(gaussian(0.0), k, p[None, :], SMALL)
        np.testing.assert_array_equal(H, 0.0)


if __name__ == "__main__":
    unittest.main()
