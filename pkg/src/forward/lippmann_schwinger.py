"""Lippmann-Schwinger solver for the scattering amplitude f on M_E.

The unknown f(k, m) is represented on radial nodes x sphere directions,
with the energy shell |m| = sqrt(E) as the first radial node. The -i0
prescription becomes a principal-value radial quadrature (Gauss nodes
paired symmetrically about sqrt(E)) plus the half-residue shell term
i pi / (2 sqrt E) times the shell integral.
"""

import logging
import math
from typing import List, Optional

import numpy as np
from scipy.special import roots_legendre

from src.domain.fields import ScatteringData
from src.domain.grids import SphereGrid
from src.errors import GridError, LippmannSchwingerDivergence
from src.models import AnalyticPotential, RunConfig
from src.parallel import map_chunks
from src.potentials import vhat

logger = logging.getLogger(__name__)

# dense kernels above this many entries are rebuilt block by block on every apply
MAX_DENSE_ENTRIES = 12_000_000


def _gauss(a: float, b: float, n: int):
    x, w = roots_legendre(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


class RadialGrid3D:
    """Radial rule for int_0^r_max ds s^2 F(s) / (s^2 - E - i0)."""

    def __init__(
        self,
        E: float,
        n_inner: int,
        n_window: int,
        n_outer: int,
        window: float,
        r_max: float,
    ):
        """Build the radial panels.

        Args:
            E: Energy
            n_inner: Gauss nodes on [0, sqrt(E) - delta]
            n_window: Gauss nodes on the PV window [sqrt(E) - delta, sqrt(E) + delta]; even
            n_outer: Gauss nodes on [sqrt(E) + delta, r_max]
            window: delta as a fraction of sqrt(E)
            r_max: Truncation radius
        """
        if n_window % 2:
            raise GridError("PV window needs an even node count")
        a = math.sqrt(E)
        delta = window * a
        if r_max <= a + delta:
            raise GridError(f"r_max={r_max} must exceed the PV window end {a + delta}")
        self.E = E
        self.shell = a
        self.delta = delta
        self.r_max = r_max

        s1, w1 = _gauss(0.0, a - delta, n_inner)
        s2, w2 = _gauss(a - delta, a + delta, n_window)
        s3, w3 = _gauss(a + delta, r_max, n_outer)
        self.nodes = np.concatenate([s1, s2, s3])
        self.weights = np.concatenate([w1, w2, w3])
        # PV coefficient s^2 w / (s^2 - E); the window pairs cancel the pole
        self.pv_coefficients = self.nodes**2 * self.weights / (self.nodes**2 - E)
        self.residue_coefficient = 0.5j * math.pi * a

    @property
    def radii(self) -> np.ndarray:
        """Shell radius followed by the quadrature radii."""
        return np.concatenate([[self.shell], self.nodes])

    @property
    def coefficients(self) -> np.ndarray:
        """Per-radius factor multiplying the solid-angle weight."""
        return np.concatenate([[self.residue_coefficient], self.pv_coefficients])

    @classmethod
    def from_config(cls, cfg: RunConfig, pot: AnalyticPotential) -> "RadialGrid3D":
        r_max = cfg.r_max
        if r_max is None:
            r_max = 8.0 * cfg.sqrt_E + 6.0 / pot.min_width
        return cls(cfg.E, cfg.ls_n_inner, cfg.ls_n_window, cfg.ls_n_outer, cfg.pv_window, r_max)


class LSResult:
    """Solution of the discretized Lippmann-Schwinger equation."""

    def __init__(
        self,
        data: ScatteringData,
        iterations: int,
        residual: float,
        contraction: float,
        increments: List[float],
    ):
        self.data = data
        self.iterations = iterations
        self.residual = residual
        self.contraction = contraction
        self.increments = increments


class LippmannSchwingerOperator:
    """Nystrom discretization of g -> int v-hat(m - l) g(m) / (m^2 - E - i0) dm."""

    def __init__(self, pot: AnalyticPotential, grid: SphereGrid, radial: RadialGrid3D):
        self.pot = pot
        self.grid = grid
        self.radial = radial
        n_dir = len(grid)
        solid = grid.weights / grid.E
        self.points = (radial.radii[:, None, None] * grid.directions[None, :, :]).reshape(-1, 3)
        self.coefficients = (radial.coefficients[:, None] * solid[None, :]).ravel()
        self.n_dir = n_dir
        self._dense: Optional[np.ndarray] = None
        if len(self.points) ** 2 <= MAX_DENSE_ENTRIES:
            self._dense = self._rows(slice(0, len(self.points)))

    def __len__(self) -> int:
        return len(self.points)

    def _rows(self, rows: slice) -> np.ndarray:
        diff = self.points[None, :, :] - self.points[rows][:, None, :]
        return vhat(self.pot, diff) * self.coefficients[None, :]

    def apply(self, G: np.ndarray, block: int = 512) -> np.ndarray:
        """Kernel times G for G of shape (n_unknowns, n_columns)."""
        if self._dense is not None:
            return self._dense @ G
        out = np.empty_like(G)
        for start in range(0, len(self.points), block):
            rows = slice(start, min(start + block, len(self.points)))
            out[rows] = self._rows(rows) @ G
        return out

    def source(self, k_index: np.ndarray) -> np.ndarray:
        """v-hat(k - l) for every unknown l and the selected k-nodes (columns)."""
        ks = self.grid.nodes[k_index]
        diff = ks[None, :, :] - self.points[:, None, :]
        return vhat(self.pot, diff)

    def on_shell(self, G: np.ndarray) -> np.ndarray:
        """Rows of G on the energy shell (first radial block)."""
        return G[: self.n_dir]


def _iterate(op: LippmannSchwingerOperator, cols: np.ndarray, cfg: RunConfig):
    S = op.source(cols)
    G = np.zeros_like(S)
    increments: List[float] = []
    contraction = 0.0
    for it in range(1, cfg.ls_max_iter + 1):
        G_new = S - op.apply(G)
        inc = float(np.max(np.abs(G_new - G))) if G.size else 0.0
        G = G_new
        increments.append(inc)
        if len(increments) > 1 and increments[-2] > 0:
            contraction = increments[-1] / increments[-2]
        logger.debug(f"LS iteration {it}: increment {inc:.3e}")
        if inc < cfg.ls_tol:
            return G, it, inc, contraction, increments
        if not np.isfinite(inc) or (len(increments) > 3 and inc > 1e6 * increments[0]):
            break
    first = int(cols[0]) if len(cols) else -1
    raise LippmannSchwingerDivergence(
        f"LS divergence at k-node {first}: residual {increments[-1]:.3e}, "
        f"contraction estimate {contraction:.3f}",
        residual=increments[-1],
        contraction=contraction,
        k_node=first,
    )


def solve_f_LS_detailed(pot: AnalyticPotential, grid: SphereGrid, cfg: RunConfig) -> LSResult:
    """Solve for f(k, .) at every k-node by successive approximations.

    Args:
        pot: Test potential
        grid: Sphere grid carrying k and l
        cfg: Run configuration (ls_tol, ls_max_iter, radial rule)

    Returns:
        LSResult with f and convergence diagnostics
    """
    radial = RadialGrid3D.from_config(cfg, pot)
    op = LippmannSchwingerOperator(pot, grid, radial)
    logger.info(
        f"Solving Lippmann-Schwinger: {len(grid)} k-nodes, {len(op)} unknowns per k, "
        f"r_max={radial.r_max:.2f}"
    )
    n = len(grid)
    chunk = max(1, math.ceil(n / cfg.threads))

    def run(cols: slice):
        return _iterate(op, np.arange(n)[cols], cfg)

    results = map_chunks(run, n, chunk, threads=cfg.threads, desc="LS k-nodes")
    f = np.empty((n, n), dtype=complex)
    iterations, residual, contraction = 0, 0.0, 0.0
    increments: List[float] = []
    for cols, (G, it, inc, q, incs) in zip(range(0, n, chunk), results):
        shell = op.on_shell(G)  # (l, k)
        f[cols : cols + shell.shape[1]] = shell.T
        iterations = max(iterations, it)
        residual = max(residual, inc)
        contraction = max(contraction, q)
        if len(incs) > len(increments):
            increments = incs
    logger.info(
        f"LS converged: {iterations} iterations, residual {residual:.2e}, contraction {contraction:.3f}"
    )
    return LSResult(ScatteringData(grid.E, grid, f), iterations, residual, contraction, increments)


def solve_f_LS(pot: AnalyticPotential, grid: SphereGrid, cfg: RunConfig) -> ScatteringData:
    """Scattering amplitude f on M_E from the Lippmann-Schwinger equation."""
    return solve_f_LS_detailed(pot, grid, cfg).data


def neumann_partial_sum(op: LippmannSchwingerOperator, k_index: np.ndarray, n: int) -> np.ndarray:
    """sum_{j<n} (-K)^j S restricted to the shell, shape (l, k)."""
    term = op.source(k_index)
    total = term.copy()
    for _ in range(n - 1):
        term = -op.apply(term)
        total += term
    return op.on_shell(total)


def reciprocity_defect(data: ScatteringData) -> float:
    """max |f(k,l) - f(-k,-l)| over node pairs."""
    anti = data.grid.antipode_index()
    return float(np.max(np.abs(data.f - data.f[np.ix_(anti, anti)])))
