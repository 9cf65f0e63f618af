"""Gaussian test potentials, the Born baseline and band-limited Fourier inversion."""

import logging
from typing import Tuple

import numpy as np
from scipy.special import erfc

from src.domain.fields import ScatteringData
from src.domain.grids import PGrid, SphereGrid
from src.errors import GridError
from src.models import AnalyticPotential

logger = logging.getLogger(__name__)


def vhat(pot: AnalyticPotential, p: np.ndarray) -> np.ndarray:
    """Closed-form v-hat(p) = (2 pi)^-3 int e^{ipx} v(x) dx for any array of 3-vectors."""
    p = np.asarray(p, dtype=float)
    p2 = np.sum(p**2, axis=-1)
    out = np.zeros(p.shape[:-1], dtype=complex)
    for term in pot.terms:
        w = term.width
        pref = term.amplitude * (w / (2.0 * np.sqrt(np.pi))) ** 3
        phase = p @ np.asarray(term.center, dtype=float)
        out += pref * np.exp(1j * phase - 0.25 * w * w * p2)
    return out


def vhat_eval(pot: AnalyticPotential, p: np.ndarray) -> complex:
    """v-hat at a single p."""
    return complex(vhat(pot, np.asarray(p, dtype=float)[None, :])[0])


def v_eval(pot: AnalyticPotential, x: np.ndarray) -> np.ndarray:
    """v(x) = sum a exp(-|x-c|^2/w^2)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1])
    for term in pot.terms:
        d2 = np.sum((x - np.asarray(term.center)) ** 2, axis=-1)
        out += term.amplitude * np.exp(-d2 / term.width**2)
    return out


def born_f(pot: AnalyticPotential, grid: SphereGrid) -> ScatteringData:
    """Born data f(k,l) = v-hat(k - l) on all node pairs."""
    diff = grid.nodes[:, None, :] - grid.nodes[None, :, :]
    return ScatteringData(grid.E, grid, vhat(pot, diff))


def abs_vhat_ball_integral(pot: AnalyticPotential, radius: float) -> Tuple[float, float]:
    """Integrals of the radial majorant sum |a|(w/2 sqrt pi)^3 exp(-w^2 p^2/4) inside and outside a ball.

    Returns:
        (inside, outside)
    """
    inside = 0.0
    outside = 0.0
    for term in pot.terms:
        b = 0.25 * term.width**2
        pref = abs(term.amplitude) * (term.width / (2.0 * np.sqrt(np.pi))) ** 3
        total = pref * (np.pi / b) ** 1.5
        # int_R^inf 4 pi p^2 e^{-b p^2} dp
        tail = 4.0 * np.pi * pref * (
            radius * np.exp(-b * radius**2) / (2.0 * b)
            + np.sqrt(np.pi) / (4.0 * b**1.5) * erfc(np.sqrt(b) * radius)
        )
        outside += tail
        inside += total - tail
    return float(inside), float(outside)


def tail_bound(pot: AnalyticPotential, radius: float) -> float:
    """int_{|p| > radius} |v-hat| dp (upper bound via the term-wise majorant)."""
    return abs_vhat_ball_integral(pot, radius)[1]


def band_limited_ift(
    vhat_samples: np.ndarray, p_grid: PGrid, x_grid: np.ndarray, chunk: int = 2048
) -> Tuple[np.ndarray, float]:
    """v_appr(x) = sum_p w_p e^{-ip.x} v-hat(p) over the ball lattice.

    Args:
        vhat_samples: Values on p_grid.nodes; tube points are filled from neighbours
        p_grid: Reconstruction grid
        x_grid: (X, 3) evaluation points

    Returns:
        (real part (X,), max |imaginary part|)
    """
    if len(p_grid.ball_nodes) == 0:
        raise GridError("empty p-grid")
    values = p_grid.fill_ball(np.asarray(vhat_samples, dtype=complex)) * p_grid.weight
    x_grid = np.atleast_2d(np.asarray(x_grid, dtype=float))
    out = np.empty(len(x_grid), dtype=complex)
    for start in range(0, len(x_grid), chunk):
        xs = x_grid[start : start + chunk]
        out[start : start + chunk] = np.exp(-1j * xs @ p_grid.ball_nodes.T) @ values
    imag = float(np.max(np.abs(out.imag))) if len(out) else 0.0
    return out.real, imag


def lattice_slack(pot: AnalyticPotential, p_grid: PGrid) -> float:
    """|sum over the lattice of |v-hat| - exact ball integral of the majorant|."""
    inside, _ = abs_vhat_ball_integral(pot, p_grid.radius)
    majorant = _majorant(pot, np.linalg.norm(p_grid.ball_nodes, axis=1))
    return float(abs(np.sum(majorant) * p_grid.weight - inside))


def _majorant(pot: AnalyticPotential, radius: np.ndarray) -> np.ndarray:
    out = np.zeros_like(radius, dtype=float)
    for term in pot.terms:
        pref = abs(term.amplitude) * (term.width / (2.0 * np.sqrt(np.pi))) ** 3
        out += pref * np.exp(-0.25 * term.width**2 * radius**2)
    return out


def staircase_bound(pot: AnalyticPotential, p_grid: PGrid) -> float:
    """Bound on int |v-hat| over the cells cut by the ball boundary."""
    half_diag = 0.5 * np.sqrt(3.0) * p_grid.h
    norms = np.linalg.norm(p_grid.lattice, axis=1)
    cut = np.abs(norms - p_grid.radius) <= half_diag
    inner = np.maximum(norms[cut] - half_diag, 0.0)
    return float(np.sum(_majorant(pot, inner)) * p_grid.weight)
