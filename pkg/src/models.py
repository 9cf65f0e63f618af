"""Configuration and report models."""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.errors import ConfigError


class RunConfig(BaseModel):
    """All numeric parameters of a run.

    The JSON form is a flat object with exactly these field names.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Physics and weights
    E: float = 4.0
    tau: float = 0.5
    tau0: float = 0.3  # restricted-data taper start, tau0 < tau
    nu: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    mu: float = 4.0
    mu0: float = 2.0
    alpha: float = 0.5
    sigma: float = 0.5
    beta: float = 0.25

    # Grid resolutions
    n_sphere: int = 8  # polar Gauss-Legendre nodes, azimuth gets twice as many
    n_lambda_circle: int = 16
    n_lambda_radial: int = 4
    n_p: int = 8
    n_phi: int = 16
    p_tube_radius: Optional[float] = None
    lambda_min: float = 0.05
    lambda_max: float = 20.0
    eps_T: float = 0.02

    # Solver controls
    fp_tol: float = 1e-8
    fp_max_iter: int = 60
    ls_tol: float = 1e-10
    ls_max_iter: int = 200

    # Forward solver quadrature
    ls_n_inner: int = 8
    ls_n_window: int = 8
    ls_n_outer: int = 12
    pv_window: float = 0.5  # half-width of the PV window as a fraction of sqrt(E)
    r_max: Optional[float] = None

    # Complex-k oracle quadrature
    oracle_n_s: int = 8
    oracle_n_beta: int = 12
    oracle_n_psi: int = 16

    # Stabilizer and interpolation
    c7: float = 0.0
    sphere_interpolation: Literal["barycentric", "rbf"] = "barycentric"

    threads: int = 1

    @field_validator("E")
    @classmethod
    def _positive_energy(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("E must be > 0")
        return v

    @field_validator("tau", "tau0")
    @classmethod
    def _unit_interval(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("tau and tau0 must lie in (0, 1)")
        return v

    @field_validator("alpha", "sigma")
    @classmethod
    def _open_unit(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("alpha and sigma must lie in (0, 1)")
        return v

    @field_validator(
        "n_sphere",
        "n_lambda_circle",
        "n_lambda_radial",
        "n_p",
        "n_phi",
        "ls_n_inner",
        "ls_n_window",
        "ls_n_outer",
        "oracle_n_s",
        "oracle_n_beta",
        "oracle_n_psi",
    )
    @classmethod
    def _resolution(cls, v: int) -> int:
        if v < 4:
            raise ValueError("grid resolutions must be >= 4")
        return v

    @field_validator("fp_tol", "ls_tol")
    @classmethod
    def _positive_tol(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("tolerances must be > 0")
        return v

    @field_validator("fp_max_iter", "ls_max_iter", "threads")
    @classmethod
    def _positive_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("iteration caps and thread counts must be >= 1")
        return v

    @model_validator(mode="after")
    def _check_relations(self) -> "RunConfig":
        if not 2 <= self.mu0 <= self.mu:
            raise ValueError("need 2 <= mu0 <= mu")
        if not 0 < self.beta < min(self.alpha, self.sigma, 0.5):
            raise ValueError("need 0 < beta < min(alpha, sigma, 1/2)")
        if abs(math.sqrt(sum(c * c for c in self.nu)) - 1.0) > 1e-12:
            raise ValueError("nu must be a unit vector")
        if self.tau0 >= self.tau:
            raise ValueError("need tau0 < tau")
        if not 0 < self.lambda_min < 1 - self.eps_T:
            raise ValueError("need 0 < lambda_min < 1 - eps_T")
        if not 1 + self.eps_T < self.lambda_max:
            raise ValueError("need lambda_max > 1 + eps_T")
        if not 0 < self.eps_T < 0.5:
            raise ValueError("eps_T must lie in (0, 0.5)")
        if not 0 < self.pv_window < 1:
            raise ValueError("pv_window must lie in (0, 1)")
        if self.ls_n_window % 2:
            raise ValueError("ls_n_window must be even (symmetric PV pairs)")
        if self.p_tube_radius is not None and self.p_tube_radius < 0:
            raise ValueError("p_tube_radius must be >= 0")
        return self

    @property
    def sqrt_E(self) -> float:
        return math.sqrt(self.E)

    @property
    def ball_radius(self) -> float:
        """Radius 2 tau sqrt(E) of the reconstruction ball."""
        return 2.0 * self.tau * self.sqrt_E

    @property
    def tube_radius(self) -> float:
        if self.p_tube_radius is None:
            return 0.05 * self.ball_radius
        return self.p_tube_radius

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(overrides)
        try:
            return RunConfig(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid config override: {str(e)}") from e

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        """Load a config file.

        Args:
            path: Path to a flat JSON object

        Returns:
            Validated RunConfig
        """
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"config not found: {path}")
        try:
            data = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {str(e)}") from e
        try:
            return cls(**data)
        except (ValidationError, TypeError) as e:
            raise ConfigError(f"invalid config: {str(e)}") from e


class GaussianTerm(BaseModel):
    """One term a exp(-|x-c|^2/w^2) of a test potential."""

    model_config = ConfigDict(frozen=True)

    amplitude: float
    width: float = Field(gt=0)
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)


class AnalyticPotential(BaseModel):
    """Sum of Gaussian terms with closed-form Fourier transform."""

    model_config = ConfigDict(frozen=True)

    terms: List[GaussianTerm] = Field(min_length=1)

    def scaled(self, factor: float) -> "AnalyticPotential":
        """Multiply every amplitude by factor."""
        return AnalyticPotential(
            terms=[t.model_copy(update={"amplitude": t.amplitude * factor}) for t in self.terms]
        )

    @property
    def min_width(self) -> float:
        return min(t.width for t in self.terms)

    @classmethod
    def from_json(cls, path: str) -> "AnalyticPotential":
        """Load a JSON list of {amplitude, width, center}."""
        pot_path = Path(path)
        if not pot_path.is_file():
            raise ConfigError(f"potential not found: {path}")
        try:
            data = json.loads(pot_path.read_text(encoding="utf-8"))
            return cls(terms=data)
        except (json.JSONDecodeError, ValidationError, TypeError) as e:
            raise ConfigError(f"invalid potential file: {str(e)}") from e


class DbarDiagnostics(BaseModel):
    """Fixed-point solve diagnostics."""

    iterations: int = 0
    contraction_estimate: float = 0.0
    residual: float = 0.0
    r1: Optional[float] = None
    r2: Optional[float] = None
    increments: List[float] = Field(default_factory=list)
    skipped_nodes: int = 0
    converged: bool = False


class CheckResult(BaseModel):
    """One pass/fail check with its margin (positive when passing)."""

    name: str
    passed: bool
    margin: float
    details: Dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    """Result of a verification suite."""

    suite: str
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def dict_for_json(self) -> Dict[str, Any]:
        """Convert to a dictionary for the JSON report."""
        data = self.model_dump()
        data["passed"] = self.passed
        return data


class DiagnosticsReport(BaseModel):
    """Empirical surrogates for the smallness conditions.

    r2 is computed from its closed form; eta_hat, delta1_hat, delta2_hat and
    r1 are measured surrogates.
    """

    eta_hat: Optional[float] = None
    delta1_hat: float = 0.0
    delta2_hat: float = 0.0
    N_hat: float = 0.0
    r1: Optional[float] = None
    r2: Optional[float] = None
    contraction_ok: bool = True
    exact: List[str] = Field(default_factory=lambda: ["r2"])
    surrogate: List[str] = Field(
        default_factory=lambda: ["eta_hat", "delta1_hat", "delta2_hat", "N_hat", "r1"]
    )


class RunReport(BaseModel):
    """JSON report written by cmd_reconstruct."""

    mode: str
    E: float
    tau: float
    mu0: float
    diagnostics: DiagnosticsReport = Field(default_factory=DiagnosticsReport)
    dbar: Optional[DbarDiagnostics] = None
    c5: Optional[float] = None
    gap: float = 0.0
    norm_vplus: float = 0.0
    norm_vminus: float = 0.0
    error_report: Dict[str, Any] = Field(default_factory=dict)

    def dict_for_json(self) -> Dict[str, Any]:
        """Convert to a dictionary for the JSON report."""
        return self.model_dump()
