"""Field containers: scattering data on M_E and complex fields on (lambda, p)."""

import numpy as np

from src.domain.grids import LambdaGrid, PGrid, SphereGrid
from src.errors import CorruptFieldError, DimensionMismatchError


def _frozen(values: np.ndarray, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


class ScatteringData:
    """Values f(k, l) on all node pairs of a SphereGrid."""

    def __init__(self, E: float, grid: SphereGrid, f: np.ndarray):
        n = len(grid)
        f = np.asarray(f)
        if f.shape != (n, n):
            raise DimensionMismatchError(
                f"scattering matrix has shape {f.shape}, grid needs {(n, n)}"
            )
        self.E = float(E)
        self.grid = grid
        self.f = _frozen(f)

    def with_values(self, f: np.ndarray) -> "ScatteringData":
        return ScatteringData(self.E, self.grid, f)

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.f)):
            raise CorruptFieldError("corrupt field: scattering data has non-finite entries")


class ComplexField2D:
    """Complex values indexed (lambda-node, p-node).

    Rows follow LambdaGrid.nodes (inner rings, then outer rings).
    """

    def __init__(self, values: np.ndarray, lambda_grid: LambdaGrid, p_grid: PGrid):
        shape = (len(lambda_grid.nodes), len(p_grid))
        values = np.asarray(values)
        if values.shape != shape:
            raise DimensionMismatchError(f"field has shape {values.shape}, expected {shape}")
        self.values = _frozen(values)
        self.lambda_grid = lambda_grid
        self.p_grid = p_grid

    @classmethod
    def zeros(cls, lambda_grid: LambdaGrid, p_grid: PGrid) -> "ComplexField2D":
        return cls(np.zeros((len(lambda_grid.nodes), len(p_grid)), dtype=complex), lambda_grid, p_grid)

    def with_values(self, values: np.ndarray) -> "ComplexField2D":
        return ComplexField2D(values, self.lambda_grid, self.p_grid)

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise CorruptFieldError("corrupt field: non-finite entries")

    def __add__(self, other: "ComplexField2D") -> "ComplexField2D":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "ComplexField2D") -> "ComplexField2D":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: complex) -> "ComplexField2D":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__
