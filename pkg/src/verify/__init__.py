"""Numeric certification: kernel bounds, identities, diagnostics and suites."""

from src.verify.bounds import bound_sweep, kernel_bound_check, weighted_bound_check, weighted_bound_sweep
from src.verify.diagnostics import diagnostics_report, holder_norm, weighted_operator_norm
from src.verify.identities import (
    cauchy_green_check,
    cauchy_green_defect,
    cauchy_monomial_checks,
    coordinate_checks,
    cutoff_split_report,
)
from src.verify.suites import SUITES, run_suite

__all__ = [
    "SUITES",
    "bound_sweep",
    "cauchy_green_check",
    "cauchy_green_defect",
    "cauchy_monomial_checks",
    "coordinate_checks",
    "cutoff_split_report",
    "diagnostics_report",
    "holder_norm",
    "kernel_bound_check",
    "run_suite",
    "weighted_bound_check",
    "weighted_bound_sweep",
    "weighted_operator_norm",
]
