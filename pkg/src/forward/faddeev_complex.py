"""Faddeev's equation at complex k, used as an independent oracle.

H(k,p) = v-hat(p) - int v-hat(p+xi) H(k,-xi) / (xi^2 + 2 k.xi) dxi

The denominator vanishes on the circle {|xi + Re k| = |Re k|, Im k . xi = 0}.
Quadrature nodes are laid out in cylindrical coordinates about Im k and, in
the (rho, t) half-plane, in polar coordinates (s, beta) centred on the
circle, where the Jacobian cancels the 1/s singularity. The nodes move
smoothly with k, so the computed H is smooth in k.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from src.errors import OracleDivergence, RealMomentumError
from src.models import AnalyticPotential, RunConfig
from src.potentials import vhat

logger = logging.getLogger(__name__)


class ComplexKQuadrature:
    """Nodes xi_n and weights c_n with sum_n c_n F(xi_n) ~ int F(xi)/(xi^2 + 2k.xi) dxi."""

    def __init__(self, k: np.ndarray, s_max: float, n_s: int, n_beta: int, n_psi: int):
        k = np.asarray(k, dtype=complex)
        re, im = k.real, k.imag
        R = float(np.linalg.norm(re))
        I = float(np.linalg.norm(im))
        if I <= 1e-12 * max(1.0, R):
            raise RealMomentumError("Im k = 0: kernel 1/(xi^2 + 2k.xi) is singular on R^3")
        e_a = re / R
        n2 = im / I
        e_b = np.cross(n2, e_a)

        x, w = roots_legendre(n_s)
        s_parts, beta_parts, weight_parts = [], [], []

        # panel 1: s <= min(R, s_max), every beta allowed
        s_hi = min(R, s_max)
        s1 = 0.5 * s_hi * (x + 1.0)
        ws1 = 0.5 * s_hi * w
        beta = -np.pi + (np.arange(n_beta) + 0.5) * (2.0 * np.pi / n_beta)
        wb = np.full(n_beta, 2.0 * np.pi / n_beta)
        s_parts.append(np.repeat(s1, n_beta))
        beta_parts.append(np.tile(beta, n_s))
        weight_parts.append(np.outer(ws1, wb).ravel())

        # panel 2: R < s <= s_max, rho >= 0 restricts |beta| <= arccos(-R/s)
        if s_max > R:
            s2 = 0.5 * (s_max - R) * (x + 1.0) + R
            ws2 = 0.5 * (s_max - R) * w
            xb, wbb = roots_legendre(n_beta)
            bmax = np.arccos(-R / s2)
            s_parts.append(np.repeat(s2, n_beta))
            beta_parts.append((bmax[:, None] * xb[None, :]).ravel())
            weight_parts.append((ws2[:, None] * bmax[:, None] * wbb[None, :]).ravel())

        s = np.concatenate(s_parts)
        b = np.concatenate(beta_parts)
        wsb = np.concatenate(weight_parts)
        rho = R + s * np.cos(b)
        t = s * np.sin(b)
        # rho ds dbeta dpsi * s / D, with D = s (2R cos b + s + 2i I sin b)
        kern = rho * wsb / (2.0 * R * np.cos(b) + s + 2j * I * np.sin(b))

        psi = 2.0 * np.pi * np.arange(n_psi) / n_psi
        dpsi = 2.0 * np.pi / n_psi
        radial_dir = np.cos(psi)[:, None] * e_a[None, :] + np.sin(psi)[:, None] * e_b[None, :]
        u = rho[:, None, None] * radial_dir[None, :, :] + t[:, None, None] * n2[None, None, :]
        self.xi = (u - re[None, None, :]).reshape(-1, 3)
        self.c = np.repeat(kern * dpsi, n_psi)
        self.k = k

    def __len__(self) -> int:
        return len(self.xi)


class ComplexKSolution:
    """Solved values H(k, -xi_n) with Nystrom evaluation at arbitrary p."""

    def __init__(self, pot: AnalyticPotential, quad: ComplexKQuadrature, u: np.ndarray, iterations: int, contraction: float):
        self.pot = pot
        self.quad = quad
        self.u = u
        self.iterations = iterations
        self.contraction = contraction

    def evaluate(self, p_list: np.ndarray, block: int = 256) -> np.ndarray:
        """H(k, p) = v-hat(p) - sum_n c_n v-hat(p + xi_n) H(k, -xi_n)."""
        p_list = np.atleast_2d(np.asarray(p_list, dtype=float))
        out = np.empty(len(p_list), dtype=complex)
        cu = self.quad.c * self.u
        for start in range(0, len(p_list), block):
            ps = p_list[start : start + block]
            vals = vhat(self.pot, ps[:, None, :] + self.quad.xi[None, :, :])
            out[start : start + block] = vhat(self.pot, ps) - vals @ cu
        return out


def oracle_s_max(pot: AnalyticPotential, reach: float = 0.0) -> float:
    """Outer radius of the oracle quadrature for evaluation up to |p| = reach."""
    return 7.0 / pot.min_width + 0.5 * reach


def build_oracle_matrix(pot: AnalyticPotential, quad: ComplexKQuadrature, block: int = 512) -> np.ndarray:
    """A[m, n] = c_n v-hat(xi_n - xi_m), so that u = S - A u."""
    n = len(quad)
    A = np.empty((n, n), dtype=complex)
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        diff = quad.xi[None, :, :] - quad.xi[rows][:, None, :]
        A[rows] = vhat(pot, diff) * quad.c[None, :]
    return A


def solve_H_oracle(
    pot: AnalyticPotential,
    k: np.ndarray,
    cfg: RunConfig,
    s_max: Optional[float] = None,
    p_list: Optional[np.ndarray] = None,
) -> ComplexKSolution:
    """Solve for H(k, .) on the quadrature nodes by successive approximations."""
    if s_max is None:
        reach = 0.0 if p_list is None else float(np.max(np.linalg.norm(np.atleast_2d(p_list), axis=1)))
        s_max = oracle_s_max(pot, reach)
    quad = ComplexKQuadrature(k, s_max, cfg.oracle_n_s, cfg.oracle_n_beta, cfg.oracle_n_psi)
    A = build_oracle_matrix(pot, quad)
    S = vhat(pot, -quad.xi)
    u = np.zeros_like(S)
    prev = 0.0
    contraction = 0.0
    growing = 0
    for it in range(1, cfg.ls_max_iter + 1):
        u_new = S - A @ u
        inc = float(np.max(np.abs(u_new - u)))
        u = u_new
        if prev > 0:
            contraction = inc / prev
            growing = growing + 1 if contraction >= 1.0 else 0
        prev = inc
        if inc < cfg.ls_tol:
            logger.debug(f"oracle converged in {it} iterations, contraction {contraction:.3f}")
            return ComplexKSolution(pot, quad, u, it, contraction)
        if not np.isfinite(inc) or growing >= 3:
            break
    raise OracleDivergence(
        f"complex-k oracle diverged: residual {prev:.3e}, contraction {contraction:.3f}",
        residual=prev,
        contraction=contraction,
    )


def solve_H_complex(pot: AnalyticPotential, k: np.ndarray, p_list: np.ndarray, cfg: RunConfig) -> np.ndarray:
    """H(k, p) at complex k for every p in p_list.

    Args:
        pot: Test potential
        k: Complex 3-vector with k.k = E and Im k != 0
        p_list: (P, 3) real vectors
        cfg: Run configuration (ls_tol, ls_max_iter, oracle_n_*)

    Returns:
        (P,) complex values
    """
    p_list = np.atleast_2d(np.asarray(p_list, dtype=float))
    sol = solve_H_oracle(pot, k, cfg, p_list=p_list)
    return sol.evaluate(p_list)


def oracle_contraction(pot: AnalyticPotential, k: np.ndarray, cfg: RunConfig, n_power: int = 30) -> float:
    """Power-iteration estimate of the spectral radius of the oracle operator.

    Exactly linear in the potential amplitude.
    """
    quad = ComplexKQuadrature(k, oracle_s_max(pot), cfg.oracle_n_s, cfg.oracle_n_beta, cfg.oracle_n_psi)
    A = build_oracle_matrix(pot, quad)
    x = np.ones(len(quad), dtype=complex) / math.sqrt(len(quad))
    ratio = 0.0
    for _ in range(n_power):
        y = A @ x
        ny = float(np.linalg.norm(y))
        nx = float(np.linalg.norm(x))
        if ny == 0.0 or nx == 0.0:
            return 0.0
        ratio = ny / nx
        x = y / ny
    return ratio
