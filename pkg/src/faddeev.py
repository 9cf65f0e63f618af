"""From f on M_E to h_gamma and to the boundary values H_+/- on the unit circle."""

import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.coords import Frame, frames, gamma_pm_batch, k_batch
from src.domain.fields import ScatteringData
from src.domain.grids import LambdaGrid, PGrid
from src.errors import FaddeevDivergence
from src.models import RunConfig
from src.parallel import map_chunks

logger = logging.getLogger(__name__)


class FaddeevSlice(NamedTuple):
    """h_gamma(k, .) on the sphere grid."""

    k: np.ndarray
    gamma: np.ndarray
    h: np.ndarray
    iterations: int
    increment: float


def _step(s: np.ndarray) -> np.ndarray:
    """chi(s) = 1 for s > 0, else 0."""
    return (s > 0).astype(float)


def _half_space_mask(data: ScatteringData, ks: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """chi((m - k).gamma) for every slice (rows) and sphere node m (columns)."""
    nodes = data.grid.nodes
    proj = nodes @ gammas.T - np.sum(ks * gammas, axis=1)[None, :]
    return _step(proj).T


def apply_B_gamma(data: ScatteringData, gamma: np.ndarray, k: np.ndarray, U: np.ndarray) -> np.ndarray:
    """(B_gamma(k) U)(l) = (pi i / sqrt E) sum_m w_m U(m) chi((m-k).gamma) f(m, l).

    Args:
        data: Scattering data f
        gamma: Unit vector with gamma.k = 0
        k: Point of the sphere
        U: Values on the sphere nodes

    Returns:
        Values on the sphere nodes
    """
    gamma = np.asarray(gamma, dtype=float)[None, :]
    k = np.asarray(k, dtype=float)[None, :]
    mask = _half_space_mask(data, k, gamma)[0]
    coef = 1j * math.pi / math.sqrt(data.E)
    return coef * ((np.asarray(U) * data.grid.weights * mask) @ data.f)


def f_rows_at(data: ScatteringData, ks: np.ndarray, method: str) -> np.ndarray:
    """f(k, .) for arbitrary sphere points k by interpolation in the first argument."""
    W = data.grid.interpolation_matrix(ks, method)
    return W @ data.f


def solve_h_gamma_batch(
    data: ScatteringData,
    gammas: np.ndarray,
    ks: np.ndarray,
    cfg: RunConfig,
    source: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int, List[float]]:
    """Solve h = f(k, .) + B_gamma(k) h for many (gamma, k) at once.

    Returns:
        (h (S, N), iterations, increment history)
    """
    gammas = np.atleast_2d(gammas)
    ks = np.atleast_2d(ks)
    if source is None:
        source = f_rows_at(data, ks, cfg.sphere_interpolation)
    mask = _half_space_mask(data, ks, gammas)
    coef = 1j * math.pi / math.sqrt(data.E)
    weights = data.grid.weights[None, :]

    h = source.copy()
    increments: List[float] = []
    growing = 0
    for it in range(1, cfg.fp_max_iter + 1):
        h_new = source + coef * ((h * weights * mask) @ data.f)
        inc = float(np.max(np.abs(h_new - h))) if h.size else 0.0
        h = h_new
        increments.append(inc)
        if len(increments) > 1 and increments[-2] > 0:
            growing = growing + 1 if inc / increments[-2] >= 1.0 else 0
        if inc < cfg.fp_tol:
            return h, it, increments
        if growing >= 3 or not np.isfinite(inc):
            ratio = inc / increments[-2] if len(increments) > 1 and increments[-2] > 0 else float("inf")
            raise FaddeevDivergence(
                f"Faddeev divergence: increment ratio {ratio:.3f} after {it} iterations",
                residual=inc,
                contraction=ratio,
            )
    ratio = increments[-1] / increments[-2] if len(increments) > 1 and increments[-2] > 0 else 0.0
    raise FaddeevDivergence(
        f"Faddeev divergence: no convergence in {cfg.fp_max_iter} iterations "
        f"(last increment {increments[-1]:.3e}, ratio {ratio:.3f})",
        residual=increments[-1],
        contraction=ratio,
    )


def solve_h_gamma(data: ScatteringData, gamma: np.ndarray, k: np.ndarray, cfg: RunConfig) -> FaddeevSlice:
    """h_gamma(k, .) by successive approximations h^(n) = sum_{j<=n} B^j f."""
    gamma = np.asarray(gamma, dtype=float)
    k = np.asarray(k, dtype=float)
    h, it, incs = solve_h_gamma_batch(data, gamma[None, :], k[None, :], cfg)
    logger.debug(f"h_gamma slice: {it} iterations, last increment {incs[-1]:.2e}")
    return FaddeevSlice(k=k, gamma=gamma, h=h[0], iterations=it, increment=incs[-1])


def neumann_series(
    data: ScatteringData, gamma: np.ndarray, k: np.ndarray, n: int, cfg: RunConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Partial sum h^(n) = sum_{j<=n} B^j f(k, .) and remainder t^(n) = h - h^(n)."""
    source = f_rows_at(data, np.atleast_2d(k), cfg.sphere_interpolation)[0]
    term = source
    partial = source.copy()
    for _ in range(n):
        term = apply_B_gamma(data, gamma, k, term)
        partial = partial + term
    h = solve_h_gamma(data, gamma, k, cfg).h
    return partial, h - partial


def boundary_points(
    lambda_grid: LambdaGrid, p_grid: PGrid, E: float, nu: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real k(zeta, p), l = k - p and gamma+ for every (circle node, p-node).

    Returns arrays with leading shape (n_circle * P,), circle index slowest.
    """
    zeta = lambda_grid.circle_nodes
    P = len(p_grid)
    p = np.tile(p_grid.nodes, (len(zeta), 1))
    lam = np.repeat(zeta, P)
    theta, omega, _ = frames(p_grid.nodes, nu)
    k = k_batch(lam, p, E, np.tile(theta, (len(zeta), 1)), np.tile(omega, (len(zeta), 1))).real
    gamma = gamma_pm_batch(k, p)
    return k, k - p, gamma


def H_pm_batch(
    data: ScatteringData, lambda_grid: LambdaGrid, p_grid: PGrid, cfg: RunConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """H_+ and H_- on every (circle node, p-node), each of shape (n_circle, P)."""
    k, l, gamma = boundary_points(lambda_grid, p_grid, data.E, np.asarray(cfg.nu))
    n_pairs = len(k)
    logger.info(f"Computing H_+/- on {n_pairs} boundary points")
    method = cfg.sphere_interpolation

    def run(sl: slice) -> Tuple[np.ndarray, np.ndarray]:
        source = f_rows_at(data, k[sl], method)
        W_l = data.grid.interpolation_matrix(l[sl], method)
        out = []
        for sign in (1.0, -1.0):
            h, _, _ = solve_h_gamma_batch(data, sign * gamma[sl], k[sl], cfg, source=source)
            out.append(np.sum(W_l * h, axis=1))
        return out[0], out[1]

    chunk = max(1, math.ceil(n_pairs / max(1, cfg.threads)))
    chunk = min(chunk, 1024)
    results = map_chunks(run, n_pairs, chunk, threads=cfg.threads, desc="H_+/- slices")
    Hp = np.concatenate([r[0] for r in results]).reshape(len(lambda_grid.circle_nodes), len(p_grid))
    Hm = np.concatenate([r[1] for r in results]).reshape(len(lambda_grid.circle_nodes), len(p_grid))
    return Hp, Hm


def H_pm_on_T(
    data: ScatteringData, lambda_: complex, p: np.ndarray, E: float, cfg: RunConfig, frame: Frame
) -> Tuple[complex, complex]:
    """H_+/-(lambda, p) = h_{gamma+/-}(k, k - p) at a single point of T x PGrid."""
    if abs(abs(lambda_) - 1.0) > 1e-10:
        raise ValueError("H_pm_on_T needs lambda on the unit circle")
    p = np.asarray(p, dtype=float)
    k = k_batch(np.array([lambda_]), p[None, :], E, frame.theta[None, :], frame.omega[None, :]).real
    gamma = gamma_pm_batch(k, p[None, :])
    W_l = data.grid.interpolation_matrix(k - p[None, :], cfg.sphere_interpolation)
    values = []
    for sign in (1.0, -1.0):
        h, _, _ = solve_h_gamma_batch(data, sign * gamma, k, cfg)
        values.append(complex(np.sum(W_l * h)))
    return values[0], values[1]


def taper_weight(s: np.ndarray, s1: float, s2: float) -> np.ndarray:
    """Piecewise-linear cutoff: 1 on [0, s1], linear down to 0 at s2, 0 beyond."""
    s = np.asarray(s, dtype=float)
    return np.clip((s2 - s) / (s2 - s1), 0.0, 1.0)


def taper_f(data: ScatteringData, tau0: float, tau: float) -> ScatteringData:
    """f(k,l) u(|k-l|, 2 tau0 sqrt E, 2 tau sqrt E)."""
    if not 0 < tau0 < tau < 1:
        raise ValueError(f"taper needs 0 < tau0 < tau < 1, got tau0={tau0}, tau={tau}")
    nodes = data.grid.nodes
    dist = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=2)
    sq = math.sqrt(data.E)
    u = taper_weight(dist, 2.0 * tau0 * sq, 2.0 * tau * sq)
    return data.with_values(data.f * u)
