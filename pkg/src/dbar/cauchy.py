"""Cauchy integrals on the unit circle and the area operator M.

Contour integrals use the trapezoid rule on LambdaGrid.circle_nodes,
counter-clockwise, with dzeta = i zeta dtheta.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import ellipk

from src.dbar.bracket import bracket_field
from src.domain.fields import ComplexField2D
from src.domain.grids import LambdaGrid
from src.errors import CoordinateError, QuadratureError
from src.models import RunConfig

logger = logging.getLogger(__name__)


def _contour_rows(circle: np.ndarray, lam: np.ndarray, inside: bool) -> np.ndarray:
    """Trapezoid weights K with K @ g = H0(lam) for data g on the circle."""
    n = len(circle)
    diff = circle[None, :] - lam[:, None]
    if inside:
        # (1/2 pi i) int g dzeta / (zeta - lam)
        return circle[None, :] / diff / n
    # -(lam / 2 pi i) int g dzeta / (zeta (zeta - lam))
    return -lam[:, None] / diff / n


def cauchy_boundary_H0(
    Hplus: np.ndarray,
    Hminus: np.ndarray,
    lambda_: complex,
    lambda_grid: LambdaGrid,
) -> np.ndarray:
    """H0(lambda, .) from boundary values on the circle nodes.

    Args:
        Hplus: Values of H_+ on circle nodes, shape (n,) or (n, P)
        Hminus: Values of H_-, same shape
        lambda_: Point with ||lambda| - 1| >= eps_T, lambda != 0
        lambda_grid: Grid supplying the circle nodes and eps_T

    Returns:
        H0 at lambda (scalar or (P,))
    """
    r = abs(lambda_)
    if r == 0 or abs(r - 1.0) < lambda_grid.eps_T:
        raise CoordinateError(f"lambda={lambda_} within eps_T of T: use boundary-limit op")
    inside = r < 1.0
    K = _contour_rows(lambda_grid.circle_nodes, np.array([lambda_]), inside)[0]
    data = np.asarray(Hplus if inside else Hminus)
    return K @ data


def cauchy_field(Hplus: np.ndarray, Hminus: np.ndarray, lambda_grid: LambdaGrid) -> np.ndarray:
    """H0 on every lambda-node (inner rows from H_+, outer rows from H_-).

    Args:
        Hplus, Hminus: (n_circle, P)

    Returns:
        (Lambda, P) values ordered like lambda_grid.nodes
    """
    circle = lambda_grid.circle_nodes
    inner = _contour_rows(circle, lambda_grid.inner_nodes, inside=True) @ Hplus
    outer = _contour_rows(circle, lambda_grid.outer_nodes, inside=False) @ Hminus
    return np.concatenate([inner, outer], axis=0)


def spectral_derivative_matrix(n: int) -> np.ndarray:
    """D with D @ g = dg/dtheta for g sampled at theta_j = 2 pi j / n."""
    freq = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    eye = np.eye(n)
    return np.fft.ifft(1j * freq[:, None] * np.fft.fft(eye, axis=0), axis=0).real


def principal_value_matrix(circle: np.ndarray, E: float) -> np.ndarray:
    """P with (P @ g)_k = (1/2 pi i) p.v. int_T g(zeta) dzeta / (zeta - lambda_k).

    Split into the arc |zeta - lambda_k| <= E^(-1/2) and its complement. On
    the arc g - g(lambda_k) is integrated (the node lambda_k contributes
    g'(lambda_k) dtheta) and g(lambda_k) is multiplied by the exact
    principal value i (m + 1/2) dtheta of the arc's m cells per side.
    """
    n = len(circle)
    dtheta = 2.0 * math.pi / n
    D = spectral_derivative_matrix(n)
    chord = 2.0 * np.sin(0.5 * dtheta * np.arange(1, n // 2 + 1))
    m = min(int(np.count_nonzero(chord <= 1.0 / math.sqrt(E))), (n - 1) // 2)

    nodes = np.arange(n)
    P = np.zeros((n, n), dtype=complex)
    for k in range(n):
        lam = circle[k]
        shift = (nodes - k) % n
        steps = np.minimum(shift, n - shift)
        others = nodes != k
        row = np.zeros(n, dtype=complex)
        row[others] = 1j * circle[others] / (circle[others] - lam) * dtheta
        on_arc = (steps > 0) & (steps <= m)
        row[k] = -np.sum(row[on_arc]) + 1j * (m + 0.5) * dtheta
        row += D[k] * dtheta
        P[k] = row / (2j * math.pi)
    return P


def boundary_limit_H0(data: np.ndarray, index: int, side: str, E: float) -> np.ndarray:
    """One-sided limit of H0 at the circle node `index`.

    side "+" uses H_+ (limit from D+): 1/2 g + PV.
    side "-" uses H_- (limit from D-): 1/2 g - PV + mean(g).
    """
    data = np.asarray(data)
    n = data.shape[0]
    circle = np.exp(2j * np.pi * np.arange(n) / n)
    P = principal_value_matrix(circle, E)
    pv = P[index] @ data
    if side == "+":
        return 0.5 * data[index] + pv
    if side == "-":
        return 0.5 * data[index] - pv + np.mean(data, axis=0)
    raise ValueError(f"side must be '+' or '-', got {side!r}")


def boundary_limit_field(Hplus: np.ndarray, Hminus: np.ndarray, lambda_grid: LambdaGrid, E: float) -> Tuple[np.ndarray, np.ndarray]:
    """H0_+ and H0_- on all circle nodes, each (n_circle, P)."""
    P = principal_value_matrix(lambda_grid.circle_nodes, E)
    plus = 0.5 * Hplus + P @ Hplus
    minus = 0.5 * Hminus - P @ Hminus + np.mean(Hminus, axis=0, keepdims=True)
    return plus, minus


def m_kernel(lambda_grid: LambdaGrid) -> np.ndarray:
    """Dense area kernel K with M(U) = K @ (U, U).

    Inner rows: -(1/pi) w / (zeta - lambda) over inner nodes.
    Outer rows: -(1/pi) w lambda / (zeta (zeta - lambda)) over outer nodes.
    The self cell uses its disk average: 0 for 1/(zeta - lambda), and
    -w / lambda for the extra -1/zeta term on the outside.
    """
    n_in = lambda_grid.n_inner
    n_all = len(lambda_grid.nodes)
    K = np.zeros((n_all, n_all), dtype=complex)

    zi = lambda_grid.inner_nodes
    wi = lambda_grid.inner_weights
    diff = zi[None, :] - zi[:, None]
    np.fill_diagonal(diff, 1.0)
    block = wi[None, :] / diff
    np.fill_diagonal(block, 0.0)
    K[:n_in, :n_in] = -block / math.pi

    zo = lambda_grid.outer_nodes
    wo = lambda_grid.outer_weights
    diff = zo[None, :] - zo[:, None]
    np.fill_diagonal(diff, 1.0)
    block = wo[None, :] * zo[:, None] / (zo[None, :] * diff)
    np.fill_diagonal(block, -wo / zo)
    K[n_in:, n_in:] = -block / math.pi
    return K


def area_transform(b: np.ndarray, lambda_grid: LambdaGrid, kernel: Optional[np.ndarray] = None) -> np.ndarray:
    """K @ b for bracket values b on (Lambda, P)."""
    if kernel is None:
        kernel = m_kernel(lambda_grid)
    return kernel @ b


def apply_M(U: ComplexField2D, cfg: RunConfig, kernel: Optional[np.ndarray] = None) -> ComplexField2D:
    """M(U)(lambda, p) for every grid node."""
    b, _ = bracket_field(U, U, cfg)
    return U.with_values(area_transform(b, U.lambda_grid, kernel))


def _c5_ring_integral(r: float) -> float:
    """(1/pi) int_{|zeta|<1} dA / ((1+|zeta|^2) |zeta - r|) for 0 <= r < 1."""

    def integrand(s: float) -> float:
        if s + r == 0.0:
            return 0.0
        m = 4.0 * s * r / (s + r) ** 2
        # int_0^{2pi} dtheta / |s e^{i theta} - r| = 4 K(m) / (s + r)
        return 4.0 * s * ellipk(m) / ((s + r) * (1.0 + s * s))

    points = [r] if 0.0 < r < 1.0 else None
    value, err, info = quad(integrand, 0.0, 1.0, points=points, limit=200, full_output=1)[:3]
    if err > 1e-6 * max(1.0, abs(value)):
        raise QuadratureError(f"c5 radial integral did not converge at r={r}: error {err:.2e}")
    return value / math.pi


def c5_constant(lambda_grid: Optional[LambdaGrid] = None, n_samples: int = 64) -> float:
    """sup over lambda in D+ of (1/pi) int_{D+} dA / ((1+|zeta|^2)|zeta - lambda|).

    The angular integral is done in closed form (complete elliptic integral),
    the radial one adaptively; the supremum is taken over n_samples radii in
    [0, 1) plus the inner radii of lambda_grid when given.
    """
    radii = np.linspace(0.0, 0.999, n_samples)
    if lambda_grid is not None:
        radii = np.concatenate([radii, lambda_grid.r_inner])
    values = [_c5_ring_integral(float(r)) for r in radii]
    c5 = float(max(values))
    logger.debug(f"c5 = {c5:.6f} from {len(radii)} radii")
    return c5
