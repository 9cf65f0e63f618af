"""The quadratic bracket (U1, U2)(lambda, p) on the characteristic circle.

(U1, U2)(lambda, p) = -(pi/4) int_{-pi}^{pi} W(phi) U1(z1, -xi) U2(z2, p + xi) chi chi dphi

with xi = xi(phi) on the circle xi^2 + 2 k.xi = 0, z1 = lambda(k, -xi),
z2 = lambda(k + xi, p + xi), and

W(phi) = a sgn(|lambda|^2 - 1)(|lambda|^2 + 1)/(conj(lambda)|lambda|) (cos phi - 1) - |p| sin(phi)/conj(lambda),

a = (E - p^2/4)^(1/2). The cutoffs chi restrict |xi| and |p + xi| to the
reconstruction ball; without them the bracket is the full right-hand side of
the d-bar equation for H.
"""

import logging
import math
from typing import Dict, Optional, Protocol, Tuple

import numpy as np
from scipy.special import roots_legendre

from src.coords import circle_basis, frames, k_batch, xi_batch, z_coordinate
from src.domain.fields import ComplexField2D
from src.domain.norms import triple_norm
from src.forward.faddeev_complex import ComplexKSolution, oracle_s_max, solve_H_oracle
from src.models import AnalyticPotential, RunConfig
from src.parallel import map_chunks

logger = logging.getLogger(__name__)

# (lambda, p) pairs per geometry chunk
CHUNK_PAIRS = 2048


class Evaluator(Protocol):
    """Anything that returns U at points of Omega_E given as (k, z, q)."""

    def evaluate(self, k: np.ndarray, z: np.ndarray, q: np.ndarray) -> np.ndarray: ...


class FieldEvaluator:
    """Interpolates a ComplexField2D: log-polar bilinear in lambda, trilinear in p."""

    def __init__(self, field: ComplexField2D):
        self.field = field

    def evaluate(self, k: np.ndarray, z: np.ndarray, q: np.ndarray) -> np.ndarray:
        if len(z) == 0:
            return np.zeros(0, dtype=complex)
        il, wl = self.field.lambda_grid.stencil(z)
        ip, wp = self.field.p_grid.stencil(q)
        vals = self.field.values[il[:, :, None], ip[:, None, :]]
        return np.sum(vals * (wl[:, :, None] * wp[:, None, :]), axis=(1, 2))


class ConstantEvaluator:
    """U equal to one constant everywhere."""

    def __init__(self, value: complex = 1.0):
        self.value = complex(value)

    def evaluate(self, k: np.ndarray, z: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.full(len(z), self.value, dtype=complex)


class OracleEvaluator:
    """H(k, q) from the complex-k solver, one solve per distinct k.

    Solutions are cached by k rounded to 12 digits.
    """

    def __init__(self, pot: AnalyticPotential, cfg: RunConfig):
        self.pot = pot
        self.cfg = cfg
        self.s_max = oracle_s_max(pot, 2.0 * cfg.sqrt_E)
        self._cache: Dict[Tuple[float, ...], ComplexKSolution] = {}

    def solution(self, k: np.ndarray) -> ComplexKSolution:
        key = tuple(np.round(np.concatenate([k.real, k.imag]), 12))
        sol = self._cache.get(key)
        if sol is None:
            sol = solve_H_oracle(self.pot, k, self.cfg, s_max=self.s_max)
            self._cache[key] = sol
        return sol

    def evaluate(self, k: np.ndarray, z: np.ndarray, q: np.ndarray) -> np.ndarray:
        out = np.empty(len(q), dtype=complex)
        if len(q) == 0:
            return out
        keys = np.round(np.concatenate([k.real, k.imag], axis=1), 12)
        _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.ravel()
        for group, row in enumerate(first):
            sel = inverse == group
            out[sel] = self.solution(k[row]).evaluate(q[sel])
        return out

    def at(self, k: np.ndarray, q: np.ndarray) -> np.ndarray:
        """H(k, q) for one complex k and many q."""
        return self.solution(np.asarray(k, dtype=complex)).evaluate(np.atleast_2d(q))


def _as_evaluator(U) -> Evaluator:
    if isinstance(U, ComplexField2D):
        return FieldEvaluator(U)
    return U


def _phi_rule(re_norm: np.ndarray, cfg: RunConfig, cutoff: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Angles and weights, shape (Q, n_phi).

    With cutoffs the rule covers only |xi| < 2 tau sqrt(E), i.e.
    |phi| < 2 arcsin(tau sqrt(E) / |Re k|). Both rules avoid phi = 0.
    """
    n = cfg.n_phi
    if cutoff:
        x, w = roots_legendre(n)
        half = 2.0 * np.arcsin(np.minimum(1.0, cfg.tau * cfg.sqrt_E / re_norm))
        return half[:, None] * x[None, :], half[:, None] * w[None, :]
    phi = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
    Q = len(re_norm)
    return np.broadcast_to(phi, (Q, n)), np.full((Q, n), 2.0 * np.pi / n)


def bracket_weight(lam: np.ndarray, p_norm: np.ndarray, phi: np.ndarray, E: float) -> np.ndarray:
    """W(phi) for arrays lam (Q,), p_norm (Q,), phi (Q, M)."""
    r = np.abs(lam)
    a = np.sqrt(E - p_norm**2 / 4.0)
    lam_bar = np.conj(lam)
    c1 = a * np.sign(r**2 - 1.0) * (r**2 + 1.0) / (lam_bar * r)
    c2 = p_norm / lam_bar
    return c1[:, None] * (np.cos(phi) - 1.0) - c2[:, None] * np.sin(phi)


def bracket_batch(
    U1,
    U2,
    lam: np.ndarray,
    p: np.ndarray,
    cfg: RunConfig,
    cutoff: bool = True,
) -> Tuple[np.ndarray, int]:
    """Bracket values at many (lambda, p) pairs.

    Args:
        U1, U2: ComplexField2D or evaluators
        lam: (Q,) complex, off T and nonzero
        p: (Q, 3) momenta off L_nu
        cfg: Run configuration (E, tau, nu, n_phi)
        cutoff: Apply the chi_{2 tau sqrt E} cutoffs

    Returns:
        (values (Q,), number of skipped quadrature nodes)
    """
    ev1, ev2 = _as_evaluator(U1), _as_evaluator(U2)
    lam = np.asarray(lam, dtype=complex)
    p = np.atleast_2d(np.asarray(p, dtype=float))
    E = cfg.E
    nu = np.asarray(cfg.nu)
    theta, omega, _ = frames(p, nu)
    k = k_batch(lam, p, E, theta, omega)
    re, perp = circle_basis(k)
    phi, wphi = _phi_rule(np.linalg.norm(re, axis=1), cfg, cutoff)
    Q, M = phi.shape

    xi = xi_batch(re, perp, phi)  # (Q, M, 3)
    k1 = np.broadcast_to(k[:, None, :], (Q, M, 3)).reshape(-1, 3)
    q1 = -xi.reshape(-1, 3)
    k2 = k1 + xi.reshape(-1, 3)
    q2 = (p[:, None, :] + xi).reshape(-1, 3)

    if cutoff:
        radius = cfg.ball_radius
        active = (np.linalg.norm(q1, axis=1) < radius) & (np.linalg.norm(q2, axis=1) < radius)
    else:
        active = np.ones(Q * M, dtype=bool)

    z1, ok1 = z_coordinate(k1, q1, E, nu)
    z2, ok2 = z_coordinate(k2, q2, E, nu)
    use = active & ok1 & ok2
    skipped = int(np.count_nonzero(active & ~(ok1 & ok2)))
    if skipped:
        logger.debug(f"bracket: skipped {skipped} degenerate quadrature nodes")

    prod = np.zeros(Q * M, dtype=complex)
    if np.any(use):
        u1 = ev1.evaluate(k1[use], z1[use], q1[use])
        u2 = ev2.evaluate(k2[use], z2[use], q2[use])
        prod[use] = u1 * u2

    # dropped nodes: rescale each row's weights to the total over its active nodes
    wphi = np.array(wphi, dtype=float)
    if skipped:
        act, kept = active.reshape(Q, M), use.reshape(Q, M)
        total = np.sum(wphi * act, axis=1)
        left = np.sum(wphi * kept, axis=1)
        scale = np.divide(total, left, out=np.zeros(Q), where=left > 0)
        wphi *= scale[:, None]

    W = bracket_weight(lam, np.linalg.norm(p, axis=1), phi, E)
    values = -0.25 * math.pi * np.sum(wphi * W * prod.reshape(Q, M), axis=1)
    return values, skipped


def bilinear_bracket(U1, U2, lambda_: complex, p: np.ndarray, cfg: RunConfig, cutoff: bool = True) -> complex:
    """(U1, U2)(lambda, p) at one point."""
    values, _ = bracket_batch(U1, U2, np.array([lambda_]), np.asarray(p, dtype=float)[None, :], cfg, cutoff)
    return complex(values[0])


def bracket_field(U1, U2, cfg: RunConfig, cutoff: bool = True, like: Optional[ComplexField2D] = None) -> Tuple[np.ndarray, int]:
    """Bracket on every (lambda-node, p-node) of the grids carried by U1 (or `like`).

    Returns:
        (values (Lambda, P), skipped node count)
    """
    ref = like if like is not None else U1
    lambda_grid, p_grid = ref.lambda_grid, ref.p_grid
    lam_nodes = lambda_grid.nodes
    n_lam, n_p = len(lam_nodes), len(p_grid)
    lam = np.repeat(lam_nodes, n_p)
    p = np.tile(p_grid.nodes, (n_lam, 1))

    def run(sl: slice):
        return bracket_batch(U1, U2, lam[sl], p[sl], cfg, cutoff)

    results = map_chunks(run, len(lam), CHUNK_PAIRS, threads=cfg.threads, desc="bracket")
    values = np.concatenate([r[0] for r in results]).reshape(n_lam, n_p)
    skipped = sum(r[1] for r in results)
    return values, skipped


def c4_estimate(U: ComplexField2D, values: np.ndarray, mu: float) -> float:
    """Empirical c4: max |(U,U)| (1+|p|)^mu (1+|lambda|^2) / |||U|||^2."""
    norm = triple_norm(U, mu)
    if norm == 0.0:
        return 0.0
    wp = (1.0 + np.linalg.norm(U.p_grid.nodes, axis=1)) ** mu
    wl = 1.0 + np.abs(U.lambda_grid.nodes) ** 2
    return float(np.max(np.abs(values) * wp[None, :] * wl[:, None]) / norm**2)
