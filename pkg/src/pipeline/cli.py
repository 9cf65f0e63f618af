"""Command-line entry point: isct simulate | reconstruct | verify."""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from src.errors import ConfigError, FormatError, IsctError, SolverError
from src.io_formats import read_scattering, write_manifest
from src.models import AnalyticPotential, RunConfig
from src.pipeline.reconstruction_pipeline import MODES, ReconstructionPipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="isct", description="Fixed-energy inverse scattering reconstruction"
    )
    parser.add_argument("command", choices=["simulate", "reconstruct", "verify"], help="Subcommand to run")
    parser.add_argument("--config", help="Flat JSON run configuration")
    parser.add_argument("--potential", help="JSON list of Gaussian terms {amplitude, width, center}")
    parser.add_argument("--data", help="Input .scat file (reconstruct)")
    parser.add_argument("--mode", choices=MODES, default="full", help="Reconstruction mode")
    parser.add_argument("--suite", default="all", help="Verification suite: coords, cauchy, bounds, dbar or all")
    parser.add_argument("--born", action="store_true", help="Simulate Born data instead of solving Lippmann-Schwinger")
    parser.add_argument("--threads", type=int, help="Worker pool size")
    parser.add_argument(
        "--out",
        help="Output: .scat file (simulate), directory (reconstruct) or report file (verify)",
    )
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config field; VALUE is parsed as JSON when possible",
    )
    parser.add_argument("--log-level", help="Logging level (default from ISCT_LOG_LEVEL or INFO)")
    return parser.parse_args(argv)


def parse_overrides(items: List[str]) -> Dict[str, Any]:
    """KEY=VALUE strings to a dictionary, JSON-decoding values where possible."""
    overrides: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"invalid override {item!r}: expected KEY=VALUE")
        try:
            overrides[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key.strip()] = raw
    return overrides


def load_config(args: argparse.Namespace) -> RunConfig:
    """Config with precedence CLI flag > JSON file > environment > field default."""
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = parse_overrides(args.set)
    if args.threads is not None:
        overrides["threads"] = args.threads
    elif "threads" not in overrides and cfg.threads == 1 and os.getenv("ISCT_THREADS"):
        try:
            overrides["threads"] = int(os.environ["ISCT_THREADS"])
        except ValueError as e:
            raise ConfigError(f"invalid ISCT_THREADS: {str(e)}") from e
    return cfg.with_overrides(**overrides) if overrides else cfg


def _require(value: Optional[str], flag: str, command: str) -> str:
    if not value:
        raise ConfigError(f"{command} needs {flag}")
    return value


def cmd_simulate(args: argparse.Namespace, cfg: RunConfig) -> int:
    pot = AnalyticPotential.from_json(_require(args.potential, "--potential", "simulate"))
    out = _require(args.out, "--out", "simulate")
    pipeline = ReconstructionPipeline(cfg)
    _, info = pipeline.simulate(pot, out, born=args.born)
    write_manifest(str(Path(out).with_suffix(".manifest.json")), "simulate", cfg, [args.potential], [out])
    for key, value in info.items():
        logger.info(f"{key}: {value}")
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace, cfg: RunConfig) -> int:
    data_path = _require(args.data, "--data", "reconstruct")
    data = read_scattering(data_path, expected_E=cfg.E)
    pot = AnalyticPotential.from_json(args.potential) if args.potential else None
    pipeline = ReconstructionPipeline(cfg, out_dir=args.out or "reconstruction")
    result = pipeline.reconstruct(data, mode=args.mode, pot=pot, data_path=data_path)
    logger.info(
        f"Gap {result.report.gap:.3e}, |v+| {result.report.norm_vplus:.3e}, |v-| {result.report.norm_vminus:.3e}"
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    pot = AnalyticPotential.from_json(args.potential) if args.potential else None
    pipeline = ReconstructionPipeline(cfg)
    report = pipeline.verify(args.suite, pot=pot, out_path=args.out or "verify_report.json")
    passed = sum(c.passed for c in report.checks)
    logger.info(f"Suite {report.suite}: {passed}/{len(report.checks)} checks passed")
    return EXIT_OK if report.passed else EXIT_FAILURE


COMMANDS = {"simulate": cmd_simulate, "reconstruct": cmd_reconstruct, "verify": cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    load_dotenv()
    args = parse_arguments(argv)
    level = (args.log_level or os.getenv("ISCT_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, FormatError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        return EXIT_USAGE
    except SolverError as e:
        stage = e.diagnostics.get("stage", args.command)
        logger.error(f"{stage} failed: {str(e)}")
        if e.diagnostics:
            logger.error(f"diagnostics: {e.diagnostics}")
        return EXIT_FAILURE
    except IsctError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
