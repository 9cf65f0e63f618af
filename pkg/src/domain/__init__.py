"""Grids, fields and weighted norms shared by every module."""

import numpy as np

from src.domain.fields import ComplexField2D, ScatteringData
from src.domain.grids import LambdaGrid, PGrid, SphereGrid
from src.domain.norms import sup_norm_ME, triple_norm, weighted_sup_norm_p
from src.models import RunConfig

__all__ = [
    "ComplexField2D",
    "LambdaGrid",
    "PGrid",
    "RunConfig",
    "ScatteringData",
    "SphereGrid",
    "build_grids",
    "sup_norm_ME",
    "triple_norm",
    "weighted_sup_norm_p",
]


def build_grids(cfg: RunConfig):
    """Construct (SphereGrid, PGrid, LambdaGrid) for a config."""
    sphere = SphereGrid(cfg.E, cfg.n_sphere)
    p_grid = PGrid(cfg.ball_radius, cfg.n_p, np.asarray(cfg.nu), cfg.tube_radius)
    lambda_grid = LambdaGrid(
        cfg.n_lambda_circle, cfg.n_lambda_radial, cfg.lambda_min, cfg.lambda_max, cfg.eps_T
    )
    return sphere, p_grid, lambda_grid
