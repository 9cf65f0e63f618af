"""The d-bar machinery: bracket, Cauchy operators and the fixed-point solve."""

from src.dbar.bracket import (
    ConstantEvaluator,
    FieldEvaluator,
    OracleEvaluator,
    bilinear_bracket,
    bracket_batch,
    bracket_field,
    c4_estimate,
)
from src.dbar.cauchy import (
    apply_M,
    area_transform,
    boundary_limit_H0,
    boundary_limit_field,
    c5_constant,
    cauchy_boundary_H0,
    cauchy_field,
    m_kernel,
    principal_value_matrix,
)
from src.dbar.solver import (
    DbarState,
    Radii,
    cap_H0,
    cap_bound,
    dbar_residual,
    dbar_sides,
    radii,
    solve_fixed_point,
)

__all__ = [
    "ConstantEvaluator",
    "DbarState",
    "FieldEvaluator",
    "OracleEvaluator",
    "Radii",
    "apply_M",
    "area_transform",
    "bilinear_bracket",
    "boundary_limit_H0",
    "boundary_limit_field",
    "bracket_batch",
    "bracket_field",
    "c4_estimate",
    "c5_constant",
    "cap_H0",
    "cap_bound",
    "cauchy_boundary_H0",
    "cauchy_field",
    "dbar_residual",
    "dbar_sides",
    "m_kernel",
    "principal_value_matrix",
    "radii",
    "solve_fixed_point",
]
