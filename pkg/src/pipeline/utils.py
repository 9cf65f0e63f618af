"""Helpers shared by the reconstruction pipeline: noise injection and Born regridding."""

import logging
import math
from typing import Tuple

import numpy as np

from src.domain.fields import ScatteringData
from src.domain.grids import LambdaGrid, PGrid
from src.faddeev import boundary_points
from src.models import RunConfig
from src.parallel import map_chunks

logger = logging.getLogger(__name__)


def add_relative_noise(data: ScatteringData, eps: float, seed: int = 0) -> ScatteringData:
    """f + eps |f| n with n complex Gaussian of unit variance, from a fixed seed.

    Args:
        data: Scattering data
        eps: Relative noise level >= 0
        seed: Generator seed

    Returns:
        Perturbed copy of data
    """
    if eps < 0:
        raise ValueError(f"noise level must be >= 0, got {eps}")
    rng = np.random.default_rng(seed)
    shape = data.f.shape
    noise = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2.0)
    return data.with_values(data.f + eps * np.abs(data.f) * noise)


def interpolate_pairs(data: ScatteringData, k: np.ndarray, l: np.ndarray, method: str) -> np.ndarray:
    """f(k_i, l_i) for off-grid sphere points by interpolation in both arguments."""
    W_k = data.grid.interpolation_matrix(k, method)
    W_l = data.grid.interpolation_matrix(l, method)
    return np.sum((W_k @ data.f) * W_l, axis=1)


def born_vhat(
    data: ScatteringData, lambda_grid: LambdaGrid, p_grid: PGrid, cfg: RunConfig
) -> Tuple[np.ndarray, float]:
    """Born estimate v-hat(p) ~ f(k, k - p), averaged over the circle nodes.

    Every (k(zeta, p), k(zeta, p) - p) with |zeta| = 1 is a point of M_E, so
    each circle node gives one sample of the linearized relation.

    Returns:
        (estimate on p_grid.nodes, max spread of the samples around their mean)
    """
    k, l, _ = boundary_points(lambda_grid, p_grid, data.E, np.asarray(cfg.nu))
    n_pairs = len(k)

    def run(sl: slice) -> np.ndarray:
        return interpolate_pairs(data, k[sl], l[sl], cfg.sphere_interpolation)

    results = map_chunks(run, n_pairs, 1024, threads=cfg.threads, desc="Born regridding")
    samples = np.concatenate(results).reshape(len(lambda_grid.circle_nodes), len(p_grid))
    estimate = samples.mean(axis=0)
    spread = float(np.max(np.abs(samples - estimate[None, :]))) if samples.size else 0.0
    logger.info(f"Born regridding: {n_pairs} samples, spread {spread:.3e}")
    return estimate, spread
