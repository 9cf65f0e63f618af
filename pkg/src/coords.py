"""The (lambda, p) chart of Omega_E, the frame theta/omega and the characteristic circle xi(phi).

Batch functions work on arrays with a leading sample axis; the single-sample
operations wrap them and raise on degenerate input.
"""

import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.errors import DegenerateFrameError, OffChartError, OutsideBallError, RealMomentumError

logger = logging.getLogger(__name__)

_DEGENERATE_TOL = 1e-12


class Frame(NamedTuple):
    """Orthonormal frame theta, omega orthogonal to p with omega = p x theta / |p|."""

    theta: np.ndarray
    omega: np.ndarray
    p: np.ndarray


class ComplexMomentum(NamedTuple):
    """A point k of Sigma_E = {k in C^3: k.k = E}."""

    k: np.ndarray
    E: float


def cdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bilinear (non-conjugated) dot product over the last axis."""
    return np.sum(a * b, axis=-1)


def frames(p: np.ndarray, nu: np.ndarray, strict: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """theta = nu x p / |nu x p| and omega = p x theta / |p| for many p.

    Args:
        p: (Q, 3) real vectors
        nu: Unit 3-vector
        strict: Raise on p on L_nu instead of masking

    Returns:
        (theta (Q, 3), omega (Q, 3), valid (Q,) bool)
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    cross = np.cross(np.asarray(nu, dtype=float)[None, :], p)
    cn = np.linalg.norm(cross, axis=1)
    pn = np.linalg.norm(p, axis=1)
    valid = cn > _DEGENERATE_TOL * np.maximum(1.0, pn)
    if strict and not np.all(valid):
        raise DegenerateFrameError("degenerate frame: p lies on L_nu")
    safe_cn = np.where(valid, cn, 1.0)
    safe_pn = np.where(valid, pn, 1.0)
    theta = cross / safe_cn[:, None]
    omega = np.cross(p, theta) / safe_pn[:, None]
    return theta, omega, valid


def frame_of(p: np.ndarray, nu: np.ndarray) -> Frame:
    """Frame of a single p, fixed by the nu-construction."""
    p = np.asarray(p, dtype=float)
    theta, omega, _ = frames(p[None, :], nu)
    return Frame(theta=theta[0], omega=omega[0], p=p)


def _radial(p: np.ndarray, E: float) -> np.ndarray:
    p2 = np.sum(np.atleast_2d(p) ** 2, axis=1)
    if np.any(p2 >= 4.0 * E):
        raise OutsideBallError("p outside ball: |p| must be below 2 sqrt(E)")
    return np.sqrt(E - p2 / 4.0)


def k_batch(
    lam: np.ndarray, p: np.ndarray, E: float, theta: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    """k = kappa1 theta + kappa2 omega + p/2 for arrays of (lambda, p)."""
    lam = np.asarray(lam, dtype=complex)
    a = _radial(p, E)
    kappa1 = 0.5 * (lam + 1.0 / lam) * a
    kappa2 = 0.5j * (1.0 / lam - lam) * a
    return kappa1[:, None] * theta + kappa2[:, None] * omega + 0.5 * np.atleast_2d(p)


def lambda_batch(k: np.ndarray, p: np.ndarray, E: float, theta: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """lambda = k.(theta + i omega) / sqrt(E - p^2/4) for arrays."""
    return cdot(k, theta + 1j * omega) / _radial(p, E)


def k_from_lambda(lambda_: complex, p: np.ndarray, E: float, frame: Optional[Frame] = None, nu=None) -> ComplexMomentum:
    """Chart map (lambda, p) -> k with k.k = E and p.p = 2 k.p.

    Args:
        lambda_: Nonzero complex coordinate
        p: 3-vector with |p| < 2 sqrt(E)
        E: Energy
        frame: Frame of p; built from nu when omitted

    Returns:
        ComplexMomentum
    """
    if lambda_ == 0:
        raise ValueError("lambda must be nonzero")
    p = np.asarray(p, dtype=float)
    if frame is None:
        frame = frame_of(p, nu)
    k = k_batch(np.array([lambda_]), p[None, :], E, frame.theta[None, :], frame.omega[None, :])
    return ComplexMomentum(k=k[0], E=E)


def lambda_from_k(k: ComplexMomentum, p: np.ndarray, frame: Frame) -> complex:
    """Inverse chart map."""
    p = np.asarray(p, dtype=float)
    lam = lambda_batch(k.k[None, :], p[None, :], k.E, frame.theta[None, :], frame.omega[None, :])
    return complex(lam[0])


def abs_im_k(lam: np.ndarray, p_norm: np.ndarray, E: float) -> np.ndarray:
    """Closed form |Im k| = sqrt(E - p^2/4) ||lambda| - 1/|lambda|| / 2."""
    r = np.abs(lam)
    return 0.5 * np.sqrt(E - p_norm**2 / 4.0) * np.abs(r - 1.0 / r)


def abs_re_k(lam: np.ndarray, p_norm: np.ndarray, E: float) -> np.ndarray:
    """Closed form |Re k| = ((E - p^2/4)(|lambda| + 1/|lambda|)^2/4 + p^2/4)^(1/2)."""
    r = np.abs(lam)
    return np.sqrt((E - p_norm**2 / 4.0) * (r + 1.0 / r) ** 2 / 4.0 + p_norm**2 / 4.0)


def circle_basis(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Re k and k_perp = Im k x Re k / |Im k| for an array of complex k."""
    k = np.atleast_2d(k)
    re, im = k.real, k.imag
    im_norm = np.linalg.norm(im, axis=1)
    if np.any(im_norm <= 1e-14 * np.maximum(1.0, np.linalg.norm(re, axis=1))):
        raise RealMomentumError("k real, k_perp undefined")
    return re, np.cross(im, re) / im_norm[:, None]


def xi_batch(re_k: np.ndarray, k_perp: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """xi(phi) = Re k (cos phi - 1) + k_perp sin phi.

    Args:
        re_k, k_perp: (Q, 3)
        phi: (Q, M) angles

    Returns:
        (Q, M, 3)
    """
    phi = np.asarray(phi, dtype=float)
    return re_k[:, None, :] * (np.cos(phi) - 1.0)[..., None] + k_perp[:, None, :] * np.sin(phi)[..., None]


def xi_circle(lambda_: complex, p: np.ndarray, E: float, phi: float, frame: Frame) -> np.ndarray:
    """Point xi(phi) of the characteristic circle xi^2 + 2 k.xi = 0."""
    k = k_from_lambda(lambda_, p, E, frame)
    re, perp = circle_basis(k.k[None, :])
    return xi_batch(re, perp, np.array([[phi]]))[0, 0]


def z_coordinate(k: np.ndarray, q: np.ndarray, E: float, nu: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """lambda-coordinate of (k, q) pairs; masks points off the chart.

    Returns:
        (z (Q,), valid (Q,))
    """
    q = np.atleast_2d(q)
    theta, omega, valid = frames(q, nu, strict=False)
    q2 = np.sum(q**2, axis=1)
    valid &= q2 < 4.0 * E
    denom = np.sqrt(np.where(valid, E - q2 / 4.0, 1.0))
    z = cdot(k, theta + 1j * omega) / denom
    valid &= np.abs(z) > 0
    return np.where(valid, z, 1.0), valid


def z1_z2(lambda_: complex, p: np.ndarray, E: float, phi: float, nu: np.ndarray) -> Tuple[complex, complex]:
    """z1 = lambda(k, -xi), z2 = lambda(k + xi, p + xi) on the circle."""
    p = np.asarray(p, dtype=float)
    frame = frame_of(p, nu)
    k = k_from_lambda(lambda_, p, E, frame).k
    xi = xi_circle(lambda_, p, E, phi, frame)
    z1, ok1 = z_coordinate(k[None, :], -xi[None, :], E, nu)
    z2, ok2 = z_coordinate((k + xi)[None, :], (p + xi)[None, :], E, nu)
    if not (ok1[0] and ok2[0]):
        raise OffChartError("arg off chart")
    return complex(z1[0]), complex(z2[0])


def gamma_pm_batch(k: np.ndarray, p: np.ndarray) -> np.ndarray:
    """gamma+ = p x (k - p/2) / (|p| |k - p/2|) for real k; gamma- = -gamma+."""
    p = np.atleast_2d(p)
    pn = np.linalg.norm(p, axis=1)
    if np.any(pn == 0):
        raise DegenerateFrameError("gamma undefined at p = 0")
    kc = np.real(k) - 0.5 * p
    g = np.cross(p, kc) / (pn * np.linalg.norm(kc, axis=1))[:, None]
    return g


def gamma_pm(lambda_: complex, p: np.ndarray, E: float, frame: Frame) -> Tuple[np.ndarray, np.ndarray]:
    """Unit vectors gamma+ and gamma- for lambda on T."""
    if abs(abs(lambda_) - 1.0) > 1e-10:
        raise ValueError("gamma_pm needs lambda on the unit circle")
    k = k_from_lambda(lambda_, p, E, frame).k
    g = gamma_pm_batch(k[None, :], np.asarray(p, dtype=float)[None, :])[0]
    return g, -g


def gamma_pm_expansion(lambda_: complex, frame: Frame) -> np.ndarray:
    """gamma+ written in the frame: -i/2 (1/lambda - lambda) theta + 1/2 (lambda + 1/lambda) omega."""
    g = -0.5j * (1.0 / lambda_ - lambda_) * frame.theta + 0.5 * (lambda_ + 1.0 / lambda_) * frame.omega
    return np.real(g)


def psi_of(lambda_: complex, p: np.ndarray, E: float) -> float:
    """Angle psi >= 0 with |sin(psi/2)| = |p| / (2 |Re k|)."""
    pn = float(np.linalg.norm(p))
    re = float(abs_re_k(np.array([lambda_]), np.array([pn]), E)[0])
    return 2.0 * float(np.arcsin(min(1.0, pn / (2.0 * re))))
