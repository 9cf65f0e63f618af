"""Quadrature grids on the energy sphere, the p-ball and the lambda plane."""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RBFInterpolator
from scipy.spatial import ConvexHull, cKDTree
from scipy.special import roots_legendre

from src.errors import GridError, InterpolationError

logger = logging.getLogger(__name__)

# query points per block when locating hull facets
_FACET_CHUNK = 256


class SphereGrid:
    """Product Gauss-Legendre (polar) x uniform (azimuth) grid on S^2_{sqrt E}.

    Nodes come in antipodal pairs, so f(k,l) and f(-k,-l) are both sampled.
    """

    def __init__(self, E: float, n_sphere: int):
        """Build the grid.

        Args:
            E: Energy, the sphere radius is sqrt(E)
            n_sphere: Number of polar nodes; the azimuth gets 2 * n_sphere
        """
        if E <= 0:
            raise GridError(f"energy must be positive, got {E}")
        if n_sphere < 2:
            raise GridError(f"n_sphere must be >= 2, got {n_sphere}")
        self.E = float(E)
        self.radius = math.sqrt(E)
        self.n_polar = n_sphere
        self.n_azimuth = 2 * n_sphere

        x, w = roots_legendre(n_sphere)
        phi = 2.0 * np.pi * np.arange(self.n_azimuth) / self.n_azimuth
        cos_t = np.repeat(x, self.n_azimuth)
        sin_t = np.sqrt(1.0 - cos_t**2)
        ph = np.tile(phi, n_sphere)

        self.directions = np.stack(
            [sin_t * np.cos(ph), sin_t * np.sin(ph), cos_t], axis=1
        )
        self.nodes = self.radius * self.directions
        self.weights = self.E * np.repeat(w, self.n_azimuth) * (2.0 * np.pi / self.n_azimuth)

        self._tree = cKDTree(self.directions)
        self._hull: Optional[ConvexHull] = None
        self._facet_inverse: Optional[np.ndarray] = None
        self._rbf_neighbors = min(len(self.nodes), 30)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.E

    def antipode_index(self) -> np.ndarray:
        """Index of the node -m for every node m."""
        dist, idx = self._tree.query(-self.directions)
        if np.max(dist) > 1e-9:
            raise GridError("sphere grid is not antipodally symmetric")
        return idx

    def _ensure_hull(self) -> None:
        if self._hull is not None:
            return
        hull = ConvexHull(self.directions)
        verts = self.directions[hull.simplices]  # (F, 3 vertices, 3 coords)
        # columns are the facet vertices: V @ bary = direction
        self._facet_inverse = np.linalg.inv(np.transpose(verts, (0, 2, 1)))
        self._hull = hull

    def barycentric(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Barycentric weights on the hull facet hit by the ray through each point.

        Neighbouring facets can share a plane (ring quads, polar caps), so the
        hit facet is the one whose smallest ray coordinate is largest; a plane
        score cannot tell coplanar facets apart.

        Args:
            points: (Q, 3) points, projected radially onto the sphere

        Returns:
            (indices (Q, 3), weights (Q, 3)) with non-negative weights summing to 1
        """
        self._ensure_hull()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0):
            raise InterpolationError("cannot interpolate at the origin")
        u = pts / norms[:, None]

        facet = np.empty(len(u), dtype=np.int64)
        for start in range(0, len(u), _FACET_CHUNK):
            block = u[start : start + _FACET_CHUNK]
            # ray coordinates of every point in every facet, (B, F, 3)
            coords = np.einsum("fij,bj->bfi", self._facet_inverse, block)
            facet[start : start + _FACET_CHUNK] = np.argmax(coords.min(axis=2), axis=1)

        bary = np.einsum("qij,qj->qi", self._facet_inverse[facet], u)
        if np.any(bary < -1e-9):
            raise InterpolationError("interpolation node outside hull")
        bary = np.clip(bary, 0.0, None)
        bary /= bary.sum(axis=1, keepdims=True)
        return self._hull.simplices[facet], bary

    def interpolation_matrix(self, points: np.ndarray, method: str = "barycentric") -> np.ndarray:
        """Dense (Q, N) matrix W with W @ values = values interpolated at points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(self.nodes)
        if method == "barycentric":
            idx, w = self.barycentric(pts)
            mat = np.zeros((len(pts), n))
            np.add.at(mat, (np.arange(len(pts))[:, None], idx), w)
            return mat
        if method == "rbf":
            u = pts / np.linalg.norm(pts, axis=1, keepdims=True)
            rbf = RBFInterpolator(
                self.directions,
                np.eye(n),
                neighbors=self._rbf_neighbors,
                kernel="cubic",
                degree=1,
            )
            return rbf(u)
        raise InterpolationError(f"unknown sphere interpolation method: {method}")


class PGrid:
    """Cell centers of a Cartesian lattice inside the ball B_{2 tau sqrt E}.

    `nodes` excludes a tube around L_nu; `ball_nodes` keeps it, with values
    on tube nodes filled from the nearest kept node.
    """

    def __init__(self, radius: float, n_p: int, nu: np.ndarray, tube_radius: float):
        """Build the grid.

        Args:
            radius: Ball radius 2 tau sqrt(E)
            n_p: Lattice points per axis across [-radius, radius]
            nu: Unit direction of the excluded line
            tube_radius: Exclusion radius around L_nu
        """
        self.radius = float(radius)
        self.n_p = n_p
        self.nu = np.asarray(nu, dtype=float)
        self.tube_radius = float(tube_radius)
        self.h = 2.0 * radius / n_p
        self.axis = -radius + (np.arange(n_p) + 0.5) * self.h

        gx, gy, gz = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        lattice = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
        norm = np.linalg.norm(lattice, axis=1)
        perp = lattice - np.outer(lattice @ self.nu, self.nu)
        in_ball = norm < self.radius
        off_tube = np.linalg.norm(perp, axis=1) > self.tube_radius

        self.lattice = lattice
        self.ball_lattice_index = np.flatnonzero(in_ball)
        self.node_lattice_index = np.flatnonzero(in_ball & off_tube)
        if len(self.node_lattice_index) == 0:
            raise GridError("p-grid is empty; increase n_p or reduce the tube radius")

        self.nodes = lattice[self.node_lattice_index]
        self.ball_nodes = lattice[self.ball_lattice_index]
        self.weight = self.h**3

        tree = cKDTree(self.nodes)
        _, self.ball_fill_index = tree.query(self.ball_nodes)
        _, self.lattice_fill_index = tree.query(lattice)
        logger.debug(
            f"PGrid: {len(self.nodes)} nodes, {len(self.ball_nodes) - len(self.nodes)} in tube"
        )

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self.nodes), self.weight)

    def fill_ball(self, values: np.ndarray) -> np.ndarray:
        """Extend node values (..., P) to all ball lattice points."""
        return np.asarray(values)[..., self.ball_fill_index]

    def stencil(self, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Trilinear stencil into `nodes` for off-grid points.

        Points with |q| >= radius get zero weights.

        Returns:
            (indices (Q, 8), weights (Q, 8))
        """
        q = np.atleast_2d(q)
        t = (q + self.radius) / self.h - 0.5
        i0 = np.clip(np.floor(t).astype(int), 0, self.n_p - 2)
        frac = np.clip(t - i0, 0.0, 1.0)

        idx = np.empty((len(q), 8), dtype=np.int64)
        w = np.empty((len(q), 8))
        c = 0
        for dx in (0, 1):
            wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
            for dy in (0, 1):
                wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
                for dz in (0, 1):
                    wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                    flat = ((i0[:, 0] + dx) * self.n_p + (i0[:, 1] + dy)) * self.n_p + (i0[:, 2] + dz)
                    idx[:, c] = self.lattice_fill_index[flat]
                    w[:, c] = wx * wy * wz
                    c += 1
        outside = np.linalg.norm(q, axis=1) >= self.radius
        w[outside] = 0.0
        return idx, w


class LambdaGrid:
    """Polar grid on T, the punctured disk D+ and the exterior D-.

    Inner rings use Gauss-Legendre in r on [lambda_min, 1 - eps_T], outer
    rings Gauss-Legendre in log r on [1 + eps_T, lambda_max]; every ring
    carries the same n_angle uniform angles as the circle.
    """

    def __init__(
        self,
        n_circle: int,
        n_radial: int,
        lambda_min: float = 0.05,
        lambda_max: float = 20.0,
        eps_T: float = 0.02,
    ):
        if n_circle < 4 or n_radial < 1:
            raise GridError("lambda grid too small")
        self.n_angle = n_circle
        self.n_radial = n_radial
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        self.eps_T = eps_T

        self.angles = 2.0 * np.pi * np.arange(n_circle) / n_circle
        self.circle_nodes = np.exp(1j * self.angles)
        dtheta = 2.0 * np.pi / n_circle

        x, w = roots_legendre(n_radial)
        a, b = lambda_min, 1.0 - eps_T
        r_in = 0.5 * (b - a) * x + 0.5 * (b + a)
        w_in = 0.5 * (b - a) * w * r_in * dtheta

        la, lb = math.log(1.0 + eps_T), math.log(lambda_max)
        s = 0.5 * (lb - la) * x + 0.5 * (lb + la)
        r_out = np.exp(s)
        w_out = 0.5 * (lb - la) * w * r_out**2 * dtheta

        self.r_inner = r_in
        self.r_outer = r_out
        self.inner_nodes = (r_in[:, None] * self.circle_nodes[None, :]).ravel()
        self.outer_nodes = (r_out[:, None] * self.circle_nodes[None, :]).ravel()
        self.inner_weights = np.repeat(w_in, n_circle)
        self.outer_weights = np.repeat(w_out, n_circle)

    @property
    def n_inner(self) -> int:
        return len(self.inner_nodes)

    @property
    def nodes(self) -> np.ndarray:
        """Inner nodes followed by outer nodes."""
        return np.concatenate([self.inner_nodes, self.outer_nodes])

    @property
    def area_weights(self) -> np.ndarray:
        return np.concatenate([self.inner_weights, self.outer_weights])

    def _side_stencil(self, z: np.ndarray, log_r: np.ndarray, offset: int):
        lr = np.log(np.abs(z))
        m = len(log_r)
        if m == 1:
            i0 = np.zeros(len(z), dtype=int)
            i1 = i0
            fr = np.zeros(len(z))
        else:
            i0 = np.clip(np.searchsorted(log_r, lr) - 1, 0, m - 2)
            i1 = i0 + 1
            fr = np.clip((lr - log_r[i0]) / (log_r[i1] - log_r[i0]), 0.0, 1.0)
        t = np.mod(np.angle(z), 2.0 * np.pi) / (2.0 * np.pi / self.n_angle)
        j0 = np.floor(t).astype(int) % self.n_angle
        j1 = (j0 + 1) % self.n_angle
        ft = t - np.floor(t)
        idx = np.stack(
            [i0 * self.n_angle + j0, i0 * self.n_angle + j1, i1 * self.n_angle + j0, i1 * self.n_angle + j1],
            axis=1,
        ) + offset
        w = np.stack(
            [(1 - fr) * (1 - ft), (1 - fr) * ft, fr * (1 - ft), fr * ft], axis=1
        )
        return idx, w

    def stencil(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Log-polar bilinear stencil into `nodes`, clamped per side of T.

        Returns:
            (indices (Q, 4), weights (Q, 4))
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        idx = np.empty((len(z), 4), dtype=np.int64)
        w = np.empty((len(z), 4))
        inner = np.abs(z) < 1.0
        if np.any(inner):
            i, ww = self._side_stencil(z[inner], np.log(self.r_inner), 0)
            idx[inner], w[inner] = i, ww
        if np.any(~inner):
            i, ww = self._side_stencil(z[~inner], np.log(self.r_outer), self.n_inner)
            idx[~inner], w[~inner] = i, ww
        return idx, w
