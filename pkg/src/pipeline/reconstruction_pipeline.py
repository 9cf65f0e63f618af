"""End-to-end workflow: simulate data, reconstruct v-hat and v, run verification suites."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Tuple

import numpy as np

from src.dbar.bracket import c4_estimate
from src.dbar.cauchy import c5_constant, cauchy_field
from src.dbar.solver import cap_H0, radii, solve_fixed_point
from src.domain import build_grids
from src.domain.fields import ComplexField2D, ScatteringData
from src.domain.norms import sup_norm_ME, weighted_sup_norm_p
from src.errors import DimensionMismatchError, SolverError
from src.extract import consistency_gap, default_x_grid, reconstruct_v, vhat_pm, weighted_error
from src.faddeev import H_pm_batch, taper_f
from src.forward.lippmann_schwinger import reciprocity_defect, solve_f_LS_detailed
from src.io_formats import write_json_report, write_manifest, write_reconstruction, write_scattering
from src.models import AnalyticPotential, DiagnosticsReport, RunConfig, RunReport, VerifyReport
from src.pipeline.utils import born_vhat
from src.potentials import born_f
from src.verify.diagnostics import diagnostics_report
from src.verify.suites import run_suite

logger = logging.getLogger(__name__)

Mode = Literal["full", "born", "restricted"]
MODES = ("full", "born", "restricted")


class Reconstruction(NamedTuple):
    """v-hat_+/- on the p-grid, the real-space field and the run report."""

    vplus: np.ndarray
    vminus: np.ndarray
    x_grid: np.ndarray
    v_appr: np.ndarray
    report: RunReport


class ReconstructionPipeline:
    """Drives the forward solver, the reconstruction procedure and the verify suites."""

    def __init__(self, cfg: RunConfig, out_dir: Optional[str] = None):
        """Initialize the pipeline.

        Args:
            cfg: Run configuration
            out_dir: Directory for reconstruction outputs; nothing is written when None
        """
        self.cfg = cfg
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.sphere, self.p_grid, self.lambda_grid = build_grids(cfg)

    def simulate(
        self, pot: AnalyticPotential, out_path: Optional[str] = None, born: bool = False
    ) -> Tuple[ScatteringData, Dict[str, Any]]:
        """Scattering data of a test potential on the configured sphere grid.

        Args:
            pot: Test potential
            out_path: .scat file to write, if any
            born: Write Born data v-hat(k - l) instead of solving Lippmann-Schwinger

        Returns:
            (data, diagnostics)
        """
        if born:
            data = born_f(pot, self.sphere)
            info: Dict[str, Any] = {"born": True}
        else:
            result = solve_f_LS_detailed(pot, self.sphere, self.cfg)
            data = result.data
            info = {
                "born": False,
                "ls_iterations": result.iterations,
                "ls_residual": result.residual,
                "ls_contraction": result.contraction,
            }
        info["reciprocity_defect"] = reciprocity_defect(data)
        info["sup_norm_ME"] = sup_norm_ME(data, self.cfg.mu)
        logger.info(
            f"Simulated f on {len(self.sphere)} nodes: reciprocity defect {info['reciprocity_defect']:.2e}"
        )
        if out_path is not None:
            write_scattering(out_path, data)
        return data, info

    def _check_data(self, data: ScatteringData) -> None:
        if abs(data.E - self.cfg.E) > 1e-12 * self.cfg.E:
            raise DimensionMismatchError(f"energy mismatch: data E={data.E}, config E={self.cfg.E}")
        if data.grid.n_polar != self.cfg.n_sphere:
            raise DimensionMismatchError(
                f"data grid has n_sphere={data.grid.n_polar}, config has {self.cfg.n_sphere}"
            )

    def _solve_dbar(
        self, data: ScatteringData, diagnostics: DiagnosticsReport
    ) -> Tuple[np.ndarray, np.ndarray, Dict[str, Any]]:
        """H_+/- -> capped H0 -> fixed point -> v-hat_+/-."""
        cfg = self.cfg
        eta = diagnostics.eta_hat or 0.0
        delta = max(diagnostics.delta1_hat, diagnostics.delta2_hat)

        # Step 1: Boundary values on T from h_gamma
        Hp, Hm = H_pm_batch(data, self.lambda_grid, self.p_grid, cfg)

        # Step 2: Cauchy data, capped at B(p)
        H0 = ComplexField2D(cauchy_field(Hp, Hm, self.lambda_grid), self.lambda_grid, self.p_grid)
        H0 = cap_H0(H0, diagnostics.N_hat, eta, delta, cfg)

        # Step 3: Fixed point
        state = solve_fixed_point(H0, cfg, r1=diagnostics.r1, r2=diagnostics.r2)

        # Step 4: Empirical radii from the solved field
        c4 = c4_estimate(state.Htilde, state.bracket_values, cfg.mu)
        c5 = c5_constant(self.lambda_grid)
        rad = radii(diagnostics.N_hat, eta, delta, c4, c5, cfg)
        state.diagnostics.r1, state.diagnostics.r2 = rad.r1, rad.r2

        # Step 5: Limits at 0 and infinity
        vp, vm = vhat_pm(state, Hp, Hm, cfg)
        extra = {
            "dbar": state.diagnostics,
            "c4": c4,
            "c5": c5,
            "r1": rad.r1,
            "limit": rad.limit,
            "radius_condition": rad.satisfied,
        }
        return vp, vm, extra

    def reconstruct(
        self,
        data: ScatteringData,
        mode: Mode = "full",
        pot: Optional[AnalyticPotential] = None,
        data_path: Optional[str] = None,
    ) -> Reconstruction:
        """Approximate v-hat on the ball and v on a real-space grid.

        Args:
            data: Scattering data on the configured grid
            mode: "full", "born" or "restricted" (full on tapered data)
            pot: Test potential; enables eta_hat and the analytic error report
            data_path: Input file recorded in the manifest

        Returns:
            Reconstruction with the run report

        Raises:
            SolverError: Diagnostics refuse the data or a solver diverges
        """
        if mode not in MODES:
            raise ValueError(f"unknown mode: {mode}")
        cfg = self.cfg
        self._check_data(data)
        data.check_finite()
        logger.info(f"Reconstructing in {mode} mode: E={cfg.E}, tau={cfg.tau}, {len(self.p_grid)} p-nodes")

        # Step 1: Restricted data keeps only |k - l| <= 2 tau sqrt(E)
        if mode == "restricted":
            data = taper_f(data, cfg.tau0, cfg.tau)

        report = RunReport(mode=mode, E=cfg.E, tau=cfg.tau, mu0=cfg.mu0)
        if mode == "born":
            # Step 2: Linearized estimate
            vp, spread = born_vhat(data, self.lambda_grid, self.p_grid, cfg)
            vm = vp
            report.error_report["born_spread"] = spread
        else:
            # Step 2: Smallness diagnostics; refuse data outside the contraction regime
            diagnostics = diagnostics_report(data, cfg, pot=pot)
            report.diagnostics = diagnostics
            if not diagnostics.contraction_ok:
                raise SolverError(
                    f"diagnostics: contraction conditions fail (eta_hat={diagnostics.eta_hat}, "
                    f"delta1_hat={diagnostics.delta1_hat:.3f}, delta2_hat={diagnostics.delta2_hat:.3f})",
                    stage="diagnostics",
                )
            # Step 3: d-bar solve and extraction
            vp, vm, extra = self._solve_dbar(data, diagnostics)
            report.dbar = extra["dbar"]
            report.c5 = extra["c5"]
            report.diagnostics.r1 = extra["r1"]
            report.error_report.update(
                {"c4": extra["c4"], "radius_limit": extra["limit"], "radius_condition": extra["radius_condition"]}
            )

        # Step 4: Gap, norms and the real-space field
        report.gap = consistency_gap(vp, vm, self.p_grid, cfg.mu0)
        report.norm_vplus = weighted_sup_norm_p(vp, self.p_grid, cfg.mu0)
        report.norm_vminus = weighted_sup_norm_p(vm, self.p_grid, cfg.mu0)
        avg = 0.5 * (vp + vm)
        x_grid = default_x_grid(self.p_grid)
        v_appr, real_report = reconstruct_v(avg, self.p_grid, x_grid, cfg, pot=pot)
        report.error_report.update(real_report)
        if pot is not None:
            report.error_report["weighted_error_plus"] = weighted_error(vp, pot, self.p_grid, cfg.mu0)
            report.error_report["weighted_error_minus"] = weighted_error(vm, pot, self.p_grid, cfg.mu0)
            report.error_report["weighted_error"] = weighted_error(avg, pot, self.p_grid, cfg.mu0)
        logger.info(f"Reconstruction done: gap {report.gap:.3e}")

        # Step 5: Outputs
        if self.out_dir is not None:
            self.write_outputs(report, vp, vm, x_grid, v_appr, [data_path] if data_path else [])
        return Reconstruction(vp, vm, x_grid, v_appr, report)

    def write_outputs(
        self,
        report: RunReport,
        vp: np.ndarray,
        vm: np.ndarray,
        x_grid: np.ndarray,
        v_appr: np.ndarray,
        inputs: List[str],
    ) -> List[Path]:
        """Write reconstruction.rec, report.json and manifest.json into out_dir."""
        out = self.out_dir
        header = {
            "E": report.E,
            "tau": report.tau,
            "mu0": report.mu0,
            "mode": report.mode,
            "norm_vplus": report.norm_vplus,
            "norm_vminus": report.norm_vminus,
            "gap": report.gap,
        }
        rec = write_reconstruction(str(out / "reconstruction.rec"), header, self.p_grid, vp, vm, x_grid, v_appr)
        rep = write_json_report(str(out / "report.json"), report.dict_for_json())
        manifest = write_manifest(
            str(out / "manifest.json"), f"reconstruct --mode {report.mode}", self.cfg, inputs, [str(rec), str(rep)]
        )
        return [rec, rep, manifest]

    def verify(self, suite: str, pot: Optional[AnalyticPotential] = None, out_path: Optional[str] = None) -> VerifyReport:
        """Run a verification suite and optionally write its JSON report."""
        report = run_suite(suite, self.cfg, pot)
        failed = [c.name for c in report.checks if not c.passed]
        if failed:
            logger.warning(f"{len(failed)} failed checks: {', '.join(sorted(set(failed)))}")
        if out_path is not None:
            write_json_report(out_path, report.dict_for_json())
        return report
