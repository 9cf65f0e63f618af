"""Named verification suites driven by the verify subcommand."""

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from src.dbar.bracket import OracleEvaluator
from src.dbar.cauchy import c5_constant
from src.dbar.solver import dbar_sides
from src.errors import ConfigError
from src.models import AnalyticPotential, CheckResult, GaussianTerm, RunConfig, VerifyReport
from src.verify.bounds import bound_sweep, weighted_bound_sweep
from src.verify.identities import (
    cauchy_green_check,
    cauchy_monomial_checks,
    coordinate_checks,
    cutoff_split_report,
)

logger = logging.getLogger(__name__)

# contraction-regime Gaussian used when no potential is given
DEFAULT_DBAR_POTENTIAL = AnalyticPotential(terms=[GaussianTerm(amplitude=0.2, width=1.0)])

DBAR_TOLERANCE = 0.1
DBAR_SAMPLES = 20
# finite-difference steps, relative to |lambda|, of the coarse and refined runs
DBAR_COARSE_STEP = 4e-3
DBAR_FINE_STEP = 1e-3


def coords_suite(cfg: RunConfig, pot: Optional[AnalyticPotential] = None) -> List[CheckResult]:
    return coordinate_checks(cfg)


def cauchy_suite(cfg: RunConfig, pot: Optional[AnalyticPotential] = None) -> List[CheckResult]:
    results = cauchy_monomial_checks(cfg.E) + cauchy_green_check()
    coarse, fine = c5_constant(n_samples=32), c5_constant(n_samples=64)
    rel = abs(fine - coarse) / fine
    results.append(
        CheckResult(
            name="c5_sampling",
            passed=bool(math.isfinite(fine) and fine >= math.pi / 2 - 1e-8 and rel < 1e-2),
            margin=float(1e-2 - rel),
            details={"c5_coarse": coarse, "c5_fine": fine},
        )
    )
    return results


def bounds_suite(cfg: RunConfig, pot: Optional[AnalyticPotential] = None) -> List[CheckResult]:
    return bound_sweep(n_samples=200) + weighted_bound_sweep(cfg.E, cfg.tau)


def dbar_points(cfg: RunConfig, n: int = DBAR_SAMPLES) -> List[tuple]:
    """Interior (lambda, p) samples, half inside T and half outside, with p orthogonal to nu."""
    nu = np.asarray(cfg.nu)
    perp = np.cross(nu, np.eye(3)[np.argmin(np.abs(nu))])
    perp /= np.linalg.norm(perp)
    samples = []
    half = max(1, n // 2)
    for i in range(n):
        t = (i // 2) / half
        radius = 0.3 + 0.5 * t if i % 2 == 0 else 1.4 + 1.6 * t
        angle = 2.0 * math.pi * (i + 0.5) / n
        p = (0.3 + 0.1 * (i % 3)) * cfg.ball_radius * perp
        samples.append((complex(radius * np.exp(1j * angle)), p))
    return samples


def _relative_residual(oracle: OracleEvaluator, lam: complex, p: np.ndarray, cfg: RunConfig, step: float) -> tuple:
    lhs, rhs = dbar_sides(oracle, lam, p, cfg, step=step * abs(lam))
    scale = max(abs(lhs), abs(rhs))
    return lhs, rhs, (abs(lhs - rhs) / scale if scale > 0 else 0.0)


def dbar_suite(cfg: RunConfig, pot: Optional[AnalyticPotential] = None) -> List[CheckResult]:
    """Finite-difference d-bar derivative of the oracle H against the bracket.

    Every sample is checked at the refined resolution (configured n_phi, small
    step). The refined mean residual must not exceed that of a coarse run
    (half the n_phi, four times the step).
    """
    pot = pot or DEFAULT_DBAR_POTENTIAL
    oracle = OracleEvaluator(pot, cfg)
    coarse_cfg = cfg.with_overrides(n_phi=max(4, cfg.n_phi // 2))
    samples = dbar_points(cfg)
    results = []
    coarse_res, fine_res = [], []
    for lam, p in samples:
        lhs, rhs, rel = _relative_residual(oracle, lam, p, cfg, DBAR_FINE_STEP)
        _, _, rel_coarse = _relative_residual(oracle, lam, p, coarse_cfg, DBAR_COARSE_STEP)
        fine_res.append(rel)
        coarse_res.append(rel_coarse)
        results.append(
            CheckResult(
                name="dbar_residual",
                passed=bool(rel <= DBAR_TOLERANCE),
                margin=float(DBAR_TOLERANCE - rel),
                details={"lambda": str(lam), "lhs": abs(lhs), "rhs": abs(rhs), "relative": rel, "coarse": rel_coarse},
            )
        )

    coarse_mean, fine_mean = float(np.mean(coarse_res)), float(np.mean(fine_res))
    # equal within rounding counts as non-increasing
    slack = 1e-12 + 1e-3 * coarse_mean
    results.append(
        CheckResult(
            name="dbar_refinement",
            passed=bool(fine_mean <= coarse_mean + slack),
            margin=float(coarse_mean + slack - fine_mean),
            details={"coarse_mean": coarse_mean, "fine_mean": fine_mean, "n_samples": len(samples)},
        )
    )
    return results + cutoff_split_report(pot, cfg, samples[:4], oracle=oracle)


SUITES: Dict[str, Callable[[RunConfig, Optional[AnalyticPotential]], List[CheckResult]]] = {
    "coords": coords_suite,
    "cauchy": cauchy_suite,
    "bounds": bounds_suite,
    "dbar": dbar_suite,
}


def run_suite(name: str, cfg: RunConfig, pot: Optional[AnalyticPotential] = None) -> VerifyReport:
    """Run one suite, or every suite for "all".

    Raises:
        ConfigError: Unknown suite name
    """
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ConfigError(f"unknown suite: {name} (choose from {', '.join(list(SUITES) + ['all'])})")

    checks: List[CheckResult] = []
    for suite in names:
        logger.info(f"Running {suite} suite")
        results = SUITES[suite](cfg, pot)
        failed = sum(not c.passed for c in results)
        logger.info(f"{suite}: {len(results) - failed}/{len(results)} checks passed")
        checks.extend(results)
    return VerifyReport(suite=name, checks=checks)
