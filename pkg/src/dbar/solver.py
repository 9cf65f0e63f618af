"""Fixed-point solve of H~ = H0 + M(H~), the cap on H0 and the d-bar residual check."""

import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.coords import frame_of, k_from_lambda
from src.dbar.bracket import OracleEvaluator, bilinear_bracket, bracket_field
from src.dbar.cauchy import area_transform, m_kernel
from src.domain.fields import ComplexField2D
from src.domain.grids import PGrid
from src.domain.norms import triple_norm
from src.errors import DbarDivergence, StencilError
from src.models import DbarDiagnostics, RunConfig

logger = logging.getLogger(__name__)

# consecutive non-contracting steps before giving up
MAX_GROWING_STEPS = 3


class Radii(NamedTuple):
    """Contraction radii and the radius condition max(r1, r2) < 1/(2 c5 c4)."""

    r1: float
    r2: float
    limit: float
    satisfied: bool


class DbarState:
    """Cauchy data, the current iterate and solve diagnostics."""

    def __init__(
        self,
        H0: ComplexField2D,
        Htilde: ComplexField2D,
        diagnostics: DbarDiagnostics,
        bracket_values: Optional[np.ndarray] = None,
    ):
        self.H0 = H0
        self.Htilde = Htilde
        self.diagnostics = diagnostics
        self.bracket_values = bracket_values

    @property
    def solved(self) -> bool:
        return self.diagnostics.converged


def _data_term(N: float, eta: float, delta: float, cfg: RunConfig, beta: float) -> float:
    """2^(mu/2) N + c7 N^2 / ((1-eta)^2 (1-delta) E^(beta/2))."""
    base = 2.0 ** (cfg.mu / 2.0) * N
    if cfg.c7 == 0.0:
        return base
    if eta >= 1.0 or delta >= 1.0:
        return math.inf
    return base + cfg.c7 * N**2 / ((1.0 - eta) ** 2 * (1.0 - delta) * cfg.E ** (beta / 2.0))


def radii(N: float, eta: float, delta: float, c4: float, c5: float, cfg: RunConfig) -> Radii:
    """r1 (with measured c4, c5) and r2 = 2^(mu/2) N / (1 - eta).

    Args:
        N: sup_norm_ME(f, mu)
        eta, delta: Contraction surrogates
        c4: Empirical bracket constant
        c5: Area-operator constant
        cfg: Run configuration (mu, mu0, tau, E, c7, beta)
    """
    if eta >= 1.0:
        r2 = math.inf
        r1 = math.inf
    else:
        r2 = 2.0 ** (cfg.mu / 2.0) * N / (1.0 - eta)
        tail = 3.0 * c5 * c4 * 2.0**cfg.mu * N**2 / (
            (1.0 - eta) ** 2 * (1.0 + 2.0 * cfg.tau * cfg.sqrt_E) ** (cfg.mu - cfg.mu0)
        )
        r1 = 2.0 * (_data_term(N, eta, delta, cfg, cfg.beta) + tail)
    limit = math.inf if c4 * c5 == 0.0 else 1.0 / (2.0 * c5 * c4)
    return Radii(r1=r1, r2=r2, limit=limit, satisfied=max(r1, r2) < limit)


def cap_bound(p_grid: PGrid, N: float, eta: float, delta: float, cfg: RunConfig, beta: Optional[float] = None) -> np.ndarray:
    """B(p) = (2^(mu/2) N + c7-term) (1+|p|)^(-mu) on the p-nodes."""
    beta = cfg.beta if beta is None else beta
    scale = _data_term(N, eta, delta, cfg, beta)
    return scale * (1.0 + np.linalg.norm(p_grid.nodes, axis=1)) ** (-cfg.mu)


def cap_H0(
    H0: ComplexField2D,
    N: float,
    eta: float,
    delta: float,
    cfg: RunConfig,
    beta: Optional[float] = None,
) -> ComplexField2D:
    """Rescale values above B(p) to magnitude B(p), keeping their phase."""
    bound = cap_bound(H0.p_grid, N, eta, delta, cfg, beta)[None, :]
    values = H0.values
    mag = np.abs(values)
    over = mag > bound
    if not np.any(over):
        return H0
    capped = np.where(over, values * (bound / np.where(over, mag, 1.0)), values)
    logger.info(f"Capped {int(np.count_nonzero(over))} H0 values")
    return H0.with_values(capped)


def solve_fixed_point(
    H0: ComplexField2D,
    cfg: RunConfig,
    r1: Optional[float] = None,
    r2: Optional[float] = None,
) -> DbarState:
    """Successive approximations H~ <- H0 + M(H~) from H~ = 0.

    Stops when the increment in the mu0-weighted norm drops below fp_tol.

    Args:
        H0: Cauchy data on LambdaGrid x PGrid
        cfg: Run configuration (fp_tol, fp_max_iter, mu0)
        r1, r2: Radii attached to the diagnostics and to a divergence error

    Returns:
        Solved DbarState
    """
    H0.check_finite()
    kernel = m_kernel(H0.lambda_grid)
    U = ComplexField2D.zeros(H0.lambda_grid, H0.p_grid)
    increments: List[float] = []
    ratios: List[float] = []
    skipped_total = 0
    growing = 0
    b = np.zeros_like(U.values)

    for it in range(1, cfg.fp_max_iter + 1):
        if increments:
            b, skipped = bracket_field(U, U, cfg)
            skipped_total += skipped
        U_new = H0.with_values(H0.values + area_transform(b, H0.lambda_grid, kernel))
        U_new.check_finite()
        inc = triple_norm(U_new - U, cfg.mu0)
        U = U_new
        increments.append(inc)
        if len(increments) > 1 and increments[-2] > 0:
            q = inc / increments[-2]
            ratios.append(q)
            growing = growing + 1 if q >= 1.0 else 0
        logger.debug(f"d-bar iteration {it}: increment {inc:.3e}")

        if inc < cfg.fp_tol:
            q_est = max(ratios) if ratios else 0.0
            logger.info(f"d-bar fixed point converged: {it} iterations, contraction {q_est:.3f}")
            diag = DbarDiagnostics(
                iterations=it,
                contraction_estimate=q_est,
                residual=inc,
                r1=r1,
                r2=r2,
                increments=increments,
                skipped_nodes=skipped_total,
                converged=True,
            )
            return DbarState(H0, U, diag, bracket_values=b)

        if growing >= MAX_GROWING_STEPS:
            raise DbarDivergence(
                f"dbar divergence (radius condition violated): contraction {ratios[-1]:.3f}, "
                f"increment {inc:.3e}, r1={r1}, r2={r2}",
                residual=inc,
                contraction=ratios[-1],
                r1=r1,
                r2=r2,
            )

    q_last = ratios[-1] if ratios else 0.0
    raise DbarDivergence(
        f"dbar divergence: no convergence in {cfg.fp_max_iter} iterations "
        f"(increment {increments[-1]:.3e}, contraction {q_last:.3f})",
        residual=increments[-1],
        contraction=q_last,
        r1=r1,
        r2=r2,
    )


def _oracle_H(oracle: OracleEvaluator, lambda_: complex, p: np.ndarray, cfg: RunConfig) -> complex:
    frame = frame_of(p, np.asarray(cfg.nu))
    k = k_from_lambda(lambda_, p, cfg.E, frame).k
    return complex(oracle.at(k, p[None, :])[0])


def dbar_sides(
    oracle: OracleEvaluator,
    lambda_: complex,
    p: np.ndarray,
    cfg: RunConfig,
    step: Optional[float] = None,
) -> Tuple[complex, complex]:
    """dH/d(conj lambda) by central differences and the uncut bracket (H, H).

    Returns:
        (lhs, rhs)
    """
    p = np.asarray(p, dtype=float)
    h = 1e-3 * abs(lambda_) if step is None else step
    side = abs(lambda_) < 1.0
    stencil = [lambda_ + h, lambda_ - h, lambda_ + 1j * h, lambda_ - 1j * h]
    for z in stencil:
        if z == 0 or (abs(z) < 1.0) != side or abs(abs(z) - 1.0) < 1e-12:
            raise StencilError(f"finite-difference stencil at lambda={lambda_} crosses T (step {h})")
    vals = [_oracle_H(oracle, z, p, cfg) for z in stencil]
    d_re = (vals[0] - vals[1]) / (2.0 * h)
    d_im = (vals[2] - vals[3]) / (2.0 * h)
    lhs = 0.5 * (d_re + 1j * d_im)
    rhs = bilinear_bracket(oracle, oracle, lambda_, p, cfg, cutoff=False)
    return lhs, rhs


def dbar_residual(
    oracle: OracleEvaluator,
    lambda_: complex,
    p: np.ndarray,
    cfg: RunConfig,
    step: Optional[float] = None,
) -> complex:
    """dH/d(conj lambda) minus (H, H) at one point; small when the d-bar equation holds."""
    lhs, rhs = dbar_sides(oracle, lambda_, p, cfg, step)
    return lhs - rhs
