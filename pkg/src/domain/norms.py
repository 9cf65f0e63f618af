"""Discrete weighted sup norms."""

import numpy as np

from src.domain.fields import ComplexField2D, ScatteringData
from src.domain.grids import PGrid
from src.errors import CorruptFieldError


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise CorruptFieldError("corrupt field")


def weighted_sup_norm_p(w: np.ndarray, p_grid: PGrid, mu0: float) -> float:
    """max over p-nodes of (1+|p|)^mu0 |w(p)|.

    Args:
        w: Values on p_grid.nodes
        p_grid: Grid carrying w
        mu0: Weight exponent

    Returns:
        The weighted maximum (0 for an empty field)
    """
    w = np.asarray(w)
    _require_finite(w)
    if w.size == 0:
        return 0.0
    weight = (1.0 + np.linalg.norm(p_grid.nodes, axis=1)) ** mu0
    return float(np.max(weight * np.abs(w)))


def triple_norm(U: ComplexField2D, mu: float) -> float:
    """max over (lambda, p) of (1+|p|)^mu |U(lambda, p)|."""
    _require_finite(U.values)
    weight = (1.0 + np.linalg.norm(U.p_grid.nodes, axis=1)) ** mu
    return float(np.max(np.abs(U.values) * weight[None, :]))


def sup_norm_ME(data: ScatteringData, mu: float) -> float:
    """max over node pairs of (1+|k-l|^2)^(mu/2) |f(k,l)|."""
    _require_finite(data.f)
    nodes = data.grid.nodes
    diff2 = np.sum((nodes[:, None, :] - nodes[None, :, :]) ** 2, axis=2)
    return float(np.max((1.0 + diff2) ** (mu / 2.0) * np.abs(data.f)))
