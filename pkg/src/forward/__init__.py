"""Synthetic data: the Lippmann-Schwinger solver and the complex-k oracle."""

from src.forward.faddeev_complex import (
    ComplexKQuadrature,
    ComplexKSolution,
    oracle_contraction,
    oracle_s_max,
    solve_H_complex,
    solve_H_oracle,
)
from src.forward.lippmann_schwinger import (
    LippmannSchwingerOperator,
    LSResult,
    RadialGrid3D,
    neumann_partial_sum,
    reciprocity_defect,
    solve_f_LS,
    solve_f_LS_detailed,
)

__all__ = [
    "ComplexKQuadrature",
    "ComplexKSolution",
    "LSResult",
    "LippmannSchwingerOperator",
    "RadialGrid3D",
    "neumann_partial_sum",
    "oracle_contraction",
    "oracle_s_max",
    "reciprocity_defect",
    "solve_H_complex",
    "solve_H_oracle",
    "solve_f_LS",
    "solve_f_LS_detailed",
]
