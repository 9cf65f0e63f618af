"""Exception hierarchy shared by all modules."""

from typing import Any, Dict, Optional


class IsctError(Exception):
    """Base class for every error raised by this package."""

    def __init__(self, message: str, **diagnostics: Any):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = diagnostics


class ConfigError(IsctError):
    """Invalid or missing configuration."""


class GridError(IsctError):
    """A grid could not be built or is empty."""


class CorruptFieldError(IsctError):
    """A field contains NaN or Inf entries."""


class CoordinateError(IsctError):
    """Base class for chart/coordinate failures."""


class DegenerateFrameError(CoordinateError):
    """p lies on the line L_nu, so theta(p) is undefined."""


class OutsideBallError(CoordinateError):
    """|p| is not below 2 sqrt(E)."""


class RealMomentumError(CoordinateError):
    """Operation needs Im k != 0 but k is real (lambda on T)."""


class OffChartError(CoordinateError):
    """A bracket argument falls off the (lambda, p) chart."""


class InterpolationError(IsctError):
    """Query outside the support of an interpolant."""


class StencilError(IsctError):
    """Finite-difference stencil crosses the unit circle."""


class QuadratureError(IsctError):
    """Adaptive quadrature failed to converge."""


class SolverError(IsctError):
    """Base class for iterative solver failures."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        contraction: Optional[float] = None,
        **diagnostics: Any,
    ):
        super().__init__(message, **diagnostics)
        self.residual = residual
        self.contraction = contraction


class LippmannSchwingerDivergence(SolverError):
    """Successive approximations for f did not converge."""


class FaddeevDivergence(SolverError):
    """Successive approximations for h_gamma did not contract."""


class OracleDivergence(SolverError):
    """The complex-k oracle iteration did not converge."""


class DbarDivergence(SolverError):
    """The d-bar fixed-point iteration left the contraction ball."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        contraction: Optional[float] = None,
        r1: Optional[float] = None,
        r2: Optional[float] = None,
    ):
        super().__init__(message, residual=residual, contraction=contraction, r1=r1, r2=r2)
        self.r1 = r1
        self.r2 = r2


class FormatError(IsctError):
    """Malformed artifact file."""


class VersionMismatchError(FormatError):
    """File format version is not supported."""


class TruncatedDataError(FormatError):
    """File body is shorter than the header promises."""


class DimensionMismatchError(FormatError):
    """Array shapes disagree with the header or the grid."""


class EnergyMismatchError(FormatError):
    """Header energy differs from the configured energy."""
