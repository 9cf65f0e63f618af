"""Measured surrogates for the smallness conditions and the contraction radii."""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from src.coords import frame_of, k_from_lambda
from src.dbar.cauchy import c5_constant
from src.dbar.solver import radii
from src.domain.fields import ScatteringData
from src.domain.norms import sup_norm_ME
from src.forward.faddeev_complex import oracle_contraction
from src.models import AnalyticPotential, DiagnosticsReport, RunConfig

logger = logging.getLogger(__name__)


def sample_slices(data: ScatteringData, n_k: int = 12, n_gamma: int = 4) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic (k-node index, k, gamma) samples with gamma orthogonal to k."""
    nodes = data.grid.nodes
    idx = np.unique(np.linspace(0, len(nodes) - 1, min(n_k, len(nodes))).astype(int))
    ks, gammas, rows = [], [], []
    for i in idx:
        k = nodes[i]
        khat = k / np.linalg.norm(k)
        e1 = np.cross(khat, np.eye(3)[np.argmin(np.abs(khat))])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(khat, e1)
        for t in 2.0 * math.pi * np.arange(n_gamma) / n_gamma:
            ks.append(k)
            gammas.append(math.cos(t) * e1 + math.sin(t) * e2)
            rows.append(i)
    return np.array(rows), np.array(ks), np.array(gammas)


def _kernel(data: ScatteringData, k: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Matrix of B_gamma(k): entry (m, l) = (pi i / sqrt E) w_m chi((m-k).gamma) f(m, l)."""
    nodes = data.grid.nodes
    mask = ((nodes - k) @ gamma > 0).astype(float)
    coef = 1j * math.pi / math.sqrt(data.E)
    return coef * (data.grid.weights * mask)[:, None] * data.f


def weighted_operator_norm(data: ScatteringData, k: np.ndarray, gamma: np.ndarray, mu: float) -> float:
    """Norm of B_gamma(k) on functions with weight (1+|k-l|^2)^(mu/2)."""
    nodes = data.grid.nodes
    w = (1.0 + np.sum((nodes - k) ** 2, axis=1)) ** (mu / 2.0)
    K = np.abs(_kernel(data, k, gamma)) / w[:, None]
    return float(np.max(w * np.sum(K, axis=0)))


def holder_norm(values: np.ndarray, points: np.ndarray, alpha: float) -> float:
    """sup |g| + sup_{l != l'} |g(l) - g(l')| / |l - l'|^alpha over the nodes."""
    values = np.asarray(values)
    if values.size == 0:
        return 0.0
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    diff = np.abs(values[:, None] - values[None, :])
    return float(np.max(np.abs(values)) + np.max(diff / dist**alpha))


def holder_ratio(data: ScatteringData, row: int, k: np.ndarray, gamma: np.ndarray, alpha: float) -> float:
    """||B_gamma(k) f(k, .)||_alpha / ||f(k, .)||_alpha, 0 for a vanishing row."""
    nodes = data.grid.nodes
    g = data.f[row]
    denom = holder_norm(g, nodes, alpha)
    if denom == 0.0:
        return 0.0
    Bg = g @ _kernel(data, k, gamma)
    return holder_norm(Bg, nodes, alpha) / denom


def oracle_sample_k(cfg: RunConfig) -> np.ndarray:
    """k(lambda = 2, p) with p orthogonal to nu at half the ball radius."""
    nu = np.asarray(cfg.nu)
    perp = np.cross(nu, np.eye(3)[np.argmin(np.abs(nu))])
    p = 0.5 * cfg.ball_radius * perp / np.linalg.norm(perp)
    return k_from_lambda(2.0, p, cfg.E, frame_of(p, nu)).k


def diagnostics_report(
    data: ScatteringData,
    cfg: RunConfig,
    pot: Optional[AnalyticPotential] = None,
    c4_hat: Optional[float] = None,
    c5: Optional[float] = None,
) -> DiagnosticsReport:
    """Empirical eta, delta_1, delta_2 and the radii r1, r2.

    Args:
        data: Scattering data f
        cfg: Run configuration (mu, alpha)
        pot: Potential; eta_hat is measured on its complex-k oracle when given
        c4_hat: Empirical bracket constant; r1 is reported only with it
        c5: Area-operator constant, computed when needed and not given

    Returns:
        DiagnosticsReport with contraction_ok iff every measured ratio is < 1
    """
    data.check_finite()
    N = sup_norm_ME(data, cfg.mu)

    eta: Optional[float] = None
    if pot is not None:
        eta = oracle_contraction(pot, oracle_sample_k(cfg), cfg)

    delta1 = 0.0
    delta2 = 0.0
    if N > 0.0:
        rows, ks, gammas = sample_slices(data)
        delta1 = max(weighted_operator_norm(data, k, g, cfg.mu) for k, g in zip(ks, gammas))
        delta2 = max(holder_ratio(data, r, k, g, cfg.alpha) for r, k, g in zip(rows, ks, gammas))

    ratios: List[float] = [delta1, delta2] + ([eta] if eta is not None else [])
    ok = all(q < 1.0 for q in ratios)
    eta_used = eta if eta is not None else 0.0
    delta = max(delta1, delta2)

    r1: Optional[float] = None
    if c4_hat is not None:
        c5 = c5_constant() if c5 is None else c5
        rad = radii(N, eta_used, delta, c4_hat, c5, cfg)
        r1, r2 = rad.r1, rad.r2
    else:
        r2 = math.inf if eta_used >= 1.0 else 2.0 ** (cfg.mu / 2.0) * N / (1.0 - eta_used)

    eta_text = "n/a" if eta is None else f"{eta:.3f}"
    logger.info(
        f"Diagnostics: N={N:.3e}, eta={eta_text}, delta1={delta1:.3f}, delta2={delta2:.3f}, "
        f"r2={r2:.3e}, contraction_ok={ok}"
    )
    return DiagnosticsReport(
        eta_hat=eta,
        delta1_hat=delta1,
        delta2_hat=delta2,
        N_hat=N,
        r1=r1,
        r2=r2,
        contraction_ok=ok,
    )
