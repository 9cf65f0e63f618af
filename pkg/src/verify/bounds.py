"""Closed-form kernel bounds for the circle integrals A and B, checked by quadrature.

A(r, psi, a, b) = int (1 - cos phi) dphi / ((1 + 2r|sin(phi/2)|)^a (1 + 2r|sin((phi - psi)/2)|)^b)
B(r, psi, a, b) = int |sin phi| dphi / (same denominator)

over [-pi, pi]. The four pieces A_j, B_j are 2 x the integral over
[0, psi/2], [psi/2, psi], [psi, min(3 psi/2, pi)], [min(3 psi/2, pi), pi].
"""

import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.integrate import quad

from src.errors import QuadratureError
from src.models import CheckResult

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10


def _integrate(fn: Callable[[float], float], a: float, b: float, breaks: Tuple[float, ...] = ()) -> float:
    if b <= a:
        return 0.0
    points = [x for x in breaks if a < x < b] or None
    result = quad(fn, a, b, points=points, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200, full_output=1)
    value, err = result[0], result[1]
    if err > 1e-8 * max(1.0, abs(value)):
        raise QuadratureError(f"quadrature on [{a:.4g}, {b:.4g}] did not converge: error {err:.2e}")
    return value


def _denominator(r: float, psi: float, alpha: float, beta: float, phi: float) -> float:
    return (1.0 + 2.0 * r * abs(math.sin(phi / 2.0))) ** alpha * (
        1.0 + 2.0 * r * abs(math.sin((phi - psi) / 2.0))
    ) ** beta


def full_integrals(r: float, psi: float, alpha: float, beta: float) -> Tuple[float, float]:
    """A and B over [-pi, pi]."""
    breaks = (0.0, psi)

    def fa(phi: float) -> float:
        return (1.0 - math.cos(phi)) / _denominator(r, psi, alpha, beta, phi)

    def fb(phi: float) -> float:
        return abs(math.sin(phi)) / _denominator(r, psi, alpha, beta, phi)

    return _integrate(fa, -math.pi, math.pi, breaks), _integrate(fb, -math.pi, math.pi, breaks)


def pieces(r: float, psi: float, alpha: float, beta: float) -> Tuple[List[float], List[float]]:
    """A_1..A_4 and B_1..B_4 for |psi|."""
    psi = abs(psi)
    edges = [0.0, psi / 2.0, psi, min(1.5 * psi, math.pi), math.pi]

    def fa(phi: float) -> float:
        return (1.0 - math.cos(phi)) / _denominator(r, psi, alpha, beta, phi)

    def fb(phi: float) -> float:
        return math.sin(phi) / _denominator(r, psi, alpha, beta, phi)

    A = [2.0 * _integrate(fa, edges[j], edges[j + 1]) for j in range(4)]
    B = [2.0 * _integrate(fb, edges[j], edges[j + 1]) for j in range(4)]
    return A, B


def piece_bounds(r: float, psi: float, alpha: float, beta: float) -> Tuple[List[float], List[float]]:
    """Right-hand sides for A_1..A_4 and B_1..B_4.

    rho/r is written as s = 2|sin(psi/2)| so that r = 0 needs no special case.
    """
    s = 2.0 * abs(math.sin(psi / 2.0))
    rho = r * s
    h_b = (1.0 + rho / 2.0) ** beta
    h_a1 = (1.0 + rho / 2.0) ** (alpha + 1.0)
    h_mix = (1.0 + rho) ** alpha * (1.0 + rho / 2.0)
    a1 = s**3 / 6.0 if r == 0 else min(s**3 / 6.0, s / r**2)
    b1 = s**2 / 2.0 if r == 0 else min(s**2 / 2.0, math.sqrt(2.0) * s / r)
    A = [
        a1 / h_b,
        s**3 / h_a1,
        4.0 * s**3 / h_mix,
        (3.0 / (1.0 + r**2) + 2.0 * math.pi / (1.0 + math.sqrt(2.0) * r) ** alpha) / h_b,
    ]
    B = [
        b1 / h_b,
        2.0 * s**2 / h_a1,
        4.0 * s**2 / h_mix,
        (5.0 / (1.0 + r) + 3.0 / (1.0 + math.sqrt(2.0) * r) ** alpha) / h_b,
    ]
    return A, B


def _margin(lhs: float, rhs: float) -> float:
    return rhs - lhs


def kernel_bound_check(r: float, psi: float, alpha: float = 2.0, beta: float = 2.0) -> CheckResult:
    """A <= sum A_j bounds, B <= sum B_j bounds and each piece under its bound.

    Args:
        r: r >= 0
        psi: Angle in [-pi, pi]
        alpha, beta: Exponents >= 2

    Returns:
        CheckResult whose margin is the smallest (bound - value)
    """
    if r < 0 or alpha < 2 or beta < 2 or abs(psi) > math.pi:
        raise ValueError(f"parameters out of range: r={r}, psi={psi}, alpha={alpha}, beta={beta}")
    A_full, B_full = full_integrals(r, psi, alpha, beta)
    A, B = pieces(r, psi, alpha, beta)
    A_bd, B_bd = piece_bounds(r, psi, alpha, beta)
    margins = [_margin(A_full, sum(A_bd)), _margin(B_full, sum(B_bd))]
    margins += [_margin(a, bd) for a, bd in zip(A, A_bd)]
    margins += [_margin(b, bd) for b, bd in zip(B, B_bd)]
    margin = min(margins)
    # pieces are computed to QUAD_TOL; allow that much on touching bounds
    passed = margin >= -10.0 * QUAD_TOL
    details: Dict[str, object] = {
        "r": r,
        "psi": psi,
        "alpha": alpha,
        "beta": beta,
        "A": A_full,
        "B": B_full,
        "A_pieces": A,
        "B_pieces": B,
        "A_bounds": A_bd,
        "B_bounds": B_bd,
    }
    return CheckResult(name="kernel_bound_AB", passed=passed, margin=margin, details=details)


def weighted_bound_sides(lambda_abs: float, rho: float, E: float, tau: float, alpha: float = 2.0, beta: float = 2.0) -> Tuple[List[float], List[float]]:
    """Left and right sides of the eight weighted piece inequalities.

    r = ((E - rho^2/4)(|lambda| + 1/|lambda|)^2 + rho^2)^(1/2) / 2 and
    |sin(psi/2)| = rho / (2r); z = (1 - tau^2) / (4 tau^2).
    """
    lam = lambda_abs
    r = math.sqrt((E - rho**2 / 4.0) * (lam + 1.0 / lam) ** 2 + rho**2) / 2.0
    psi = 2.0 * math.asin(min(1.0, rho / (2.0 * r)))
    z = (1.0 - tau**2) / (4.0 * tau**2)
    A, B = pieces(r, psi, alpha, beta)
    L = math.sqrt(E - rho**2 / 4.0) * (lam**2 + 1.0) / lam**2
    q = (lam**2 + 1.0) ** 2 * z
    lhs = [L * a for a in A] + [rho * b / lam for b in B]
    rhs = [
        4.0 * lam / (q * (1.0 + rho / 2.0) ** beta),
        16.0 * lam / (q * (1.0 + rho / 2.0) ** alpha),
        64.0 * lam / (q * (1.0 + rho) ** alpha),
        4.0 * math.sqrt(2.0) * (3.0 + math.pi)
        / ((lam**2 + 1.0) * math.sqrt(E) * min(1.0, 2.0 * math.sqrt(z)) * (1.0 + rho / 2.0) ** beta),
        4.0 * math.sqrt(2.0) * lam / (q * (1.0 + rho / 2.0) ** beta),
        16.0 * lam / (q * (1.0 + rho / 2.0) ** alpha),
        32.0 * lam / (q * (1.0 + rho) ** alpha),
        15.0 / ((lam**2 + 1.0) * math.sqrt(z) * (1.0 + rho / 2.0) ** beta),
    ]
    return lhs, rhs


def weighted_bound_check(lambda_: complex, rho: float, E: float, tau: float, alpha: float = 2.0, beta: float = 2.0) -> CheckResult:
    """All eight weighted piece inequalities at one (lambda, rho)."""
    if lambda_ == 0 or not 0 <= rho <= 2.0 * tau * math.sqrt(E):
        raise ValueError(f"need lambda != 0 and 0 <= rho <= 2 tau sqrt(E), got {lambda_}, {rho}")
    lhs, rhs = weighted_bound_sides(abs(lambda_), rho, E, tau, alpha, beta)
    margins = [b - a for a, b in zip(lhs, rhs)]
    margin = min(margins)
    return CheckResult(
        name="kernel_bound_weighted",
        passed=margin >= -10.0 * QUAD_TOL,
        margin=margin,
        details={"lambda_abs": abs(lambda_), "rho": rho, "E": E, "tau": tau, "lhs": lhs, "rhs": rhs},
    )


def bound_sweep(n_samples: int = 200, seed: int = 0, alpha: float = 2.0, beta: float = 2.0) -> List[CheckResult]:
    """Random (r, psi) samples for the unweighted bounds."""
    rng = np.random.default_rng(seed)
    r_vals = rng.uniform(0.0, 20.0, n_samples)
    psi_vals = rng.uniform(-math.pi, math.pi, n_samples)
    return [kernel_bound_check(float(r), float(psi), alpha, beta) for r, psi in zip(r_vals, psi_vals)]


def weighted_bound_sweep(
    E: float, tau: float, n_samples: int = 50, seed: int = 0, alpha: float = 2.0, beta: float = 2.0
) -> List[CheckResult]:
    """Random (|lambda|, rho) samples for the weighted bounds, |lambda| off the unit circle."""
    rng = np.random.default_rng(seed)
    log_lam = rng.uniform(0.05, 2.0, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    lam = np.exp(log_lam)
    rho = rng.uniform(0.0, 2.0 * tau * math.sqrt(E), n_samples)
    return [weighted_bound_check(complex(l), float(p), E, tau, alpha, beta) for l, p in zip(lam, rho)]
