import argparse
import logging
import sys
from typing import Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from src.core.exceptions import ConfigurationError, NumericalFailure, TruncationTooSmall
from src.data.results_store import ResultsStore, provenance
from src.experiments import runner
from src.experiments.config import ExperimentConfig, load_config
from src.schemes.instances import SchemeTag

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_TOLERANCE = 3

COMMANDS = ("simulate", "scaling", "figure3", "bounds", "fisher", "oracle-check")
COMMAND_ALIASES = {"figure3": ["crossover"]}

FIGURE3_CURVES = "switch_joint_rmse=solid-red;switch_control_rmse=dashed-red;fixed_order_floor=solid-blue"


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Path to a flat JSON configuration file")
    parser.add_argument("--scheme", dest="schemes", action="append", choices=[t.value for t in SchemeTag],
                        help="Scheme to run (repeatable)")
    parser.add_argument("--n", dest="ns", action="append", type=int, help="Boxes per kind N (repeatable)")
    parser.add_argument("--nu", type=int, help="Repetitions per estimate")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--xbar", dest="x_bar", type=float, help="Mean x displacement")
    parser.add_argument("--pbar", dest="p_bar", type=float, help="Mean p displacement")
    parser.add_argument("--x-range", dest="x_range", nargs=2, type=float, metavar=("MIN", "MAX"),
                        help="Bounds of the random x displacements")
    parser.add_argument("--p-range", dest="p_range", nargs=2, type=float, metavar=("MIN", "MAX"),
                        help="Bounds of the random p displacements")
    parser.add_argument("--instances", type=int, help="Random instances per N when ranges are given")
    parser.add_argument("--target-phase", dest="target_phase", type=float, help="N²A held fixed in SWITCH sweeps")
    parser.add_argument("--beta-gup", dest="beta_gup", type=float, help="beta of the modified commutator")
    parser.add_argument("--energy", dest="energies", action="append", type=float, help="Probe energy E (repeatable)")
    parser.add_argument("--zmax", dest="z_max", type=float, help="Largest displacement magnitude")
    parser.add_argument("--energy-budget", dest="energy_budget", type=float, help="Total energy requirement bound")
    parser.add_argument("--dim", type=int, help="Fock truncation for oracle-check")
    parser.add_argument("--cases", type=int, help="Random cases for oracle-check")
    parser.add_argument("--max-n", dest="oracle_max_n", type=int, help="Largest N for oracle-check")
    parser.add_argument("--magnitude", type=float, help="Largest displacement for oracle-check")
    parser.add_argument("--out", help="Output file (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"], help="Output format")
    parser.add_argument("--workers", type=int, help="Worker processes for Monte Carlo trials")
    parser.add_argument("--log-level", dest="log_level", help="Logging level")
    parser.add_argument("--progress", action="store_true", default=None, help="Show progress bars")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = ArgumentParser(description="Quantum-SWITCH continuous-variable metrology simulator")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    for command in COMMANDS:
        _add_common(subparsers.add_parser(command, aliases=COMMAND_ALIASES.get(command, [])))
    args = parser.parse_args(argv)
    for command, aliases in COMMAND_ALIASES.items():
        if args.command in aliases:
            args.command = command
    return args


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.command == "oracle-check" and args.ns:
        overrides["oracle_max_n"] = max(args.ns)
    for key in ("x_range", "p_range"):
        if overrides.get(key) is not None:
            overrides[key] = tuple(overrides[key])
    return load_config(args.config, overrides, command=args.command)


def _emit(store: ResultsStore, frame: pd.DataFrame, config: ExperimentConfig, command: str, **extra) -> None:
    header = {**provenance(config, command), **extra}
    text = store.write(frame, config.out, config.format, header)
    if not config.out:
        sys.stdout.write(text)


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    store = ResultsStore()
    command = args.command

    if command == "simulate":
        _emit(store, runner.cmd_simulate(config), config, command)
    elif command == "scaling":
        report = runner.cmd_scaling(config)
        frame = pd.DataFrame(report.fits).merge(pd.DataFrame(report.rows), on="scheme")
        _emit(store, frame, config, command)
        if not report.passed:
            logger.error("Scaling slopes outside tolerance: %s",
                         [f["scheme"] for f in report.fits if not f["passed"]])
            return EXIT_TOLERANCE
    elif command == "figure3":
        _emit(store, runner.cmd_figure3(config), config, command, curves=FIGURE3_CURVES)
    elif command == "bounds":
        _emit(store, runner.cmd_bounds(config), config, command)
    elif command == "fisher":
        _emit(store, runner.cmd_fisher(config), config, command)
    elif command == "oracle-check":
        report = runner.cmd_oracle_check(config)
        row = {**report.model_dump(), "passed": report.passed}
        _emit(store, pd.DataFrame([row]), config, command)
        if not report.passed:
            logger.error("Oracle comparison failed")
            return EXIT_TOLERANCE
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    try:
        return run(parse_args(argv))
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, ValidationError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationTooSmall as e:
        print(f"numerical failure: {e} (suggested dim: {e.suggested_dim})", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
