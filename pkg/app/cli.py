"""
Command-line front end.

    spin-brayton eval --kind fixed-fx --B 1 --J 0.5 --kT 0.5 --r 3 --phi 0.25
    spin-brayton sweep --kind fixed-fy --kT 0.5 --vary-j 0.05:2:41 --format csv
    spin-brayton verify

Settings come from an optional JSON file (--config) overridden by flags.
Results go to stdout (or --output); logs go to stderr.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 failed
verification.
"""

import argparse
import json
import pathlib
import sys
from typing import Any, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ValidationError

from app.config import settings
from app.exceptions import (
    ConfigurationError,
    DomainError,
    NumericalError,
)
from app.schemas.cycles import CycleKind, SweepHold
from app.schemas.processes import BumpKind
from app.schemas.requests import Command, OutputFormat, RunConfig
from app.schemas.substances import PairModel
from app.services.cycles import BraytonCycleSolver, build_spec
from app.services.isothermal import IsothermalAnalyzer
from app.services.sweeps import SweepRunner, build_sweep_spec
from app.services.verification import InvariantSuite
from app.utils.formatting import round_significant, to_json

logger = settings.get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY_FAILED = 3


def _vary_j(text: str) -> dict[str, Any]:
    """'lo:hi:n' -> {'lo': lo, 'hi': hi, 'n': n}."""
    try:
        lo, hi, n = text.split(":")
        return {"lo": float(lo), "hi": float(hi), "n": int(n)}
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"--vary-j expects lo:hi:n, got {text!r}"
        ) from exc


class _ArgumentParser(argparse.ArgumentParser):
    """Reports bad flags as ConfigurationError (exit code 1, not 2)."""

    def error(self, message: str):
        raise ConfigurationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(
        add_help=False, argument_default=argparse.SUPPRESS
    )
    common.add_argument("--config", help="JSON file with run settings")

    substance = common.add_argument_group("substance")
    substance.add_argument("--B", type=float, help="magnetic field")
    substance.add_argument("--J", type=float, help="exchange coupling")
    substance.add_argument("--gamma", type=float, help="XY anisotropy")
    substance.add_argument("--delta", type=float, help="ZZ coupling ratio")
    substance.add_argument(
        "--model", choices=[m.value for m in PairModel], help="pair model"
    )

    cycle = common.add_argument_group("cycle")
    cycle.add_argument(
        "--kind", choices=[k.value for k in CycleKind], help="cycle kind"
    )
    cycle.add_argument("--r", type=float, help="compression ratio")
    cycle.add_argument("--phi", type=float, help="pressure ratio")
    temperature = cycle.add_mutually_exclusive_group()
    temperature.add_argument("--beta", type=float, help="inverse temperature")
    temperature.add_argument("--kT", type=float, help="temperature kT")

    sweep = common.add_argument_group("sweep")
    sweep.add_argument(
        "--vary-j", dest="vary_j", type=_vary_j, help="J/B range lo:hi:n"
    )
    sweep.add_argument(
        "--hold",
        choices=[h.value for h in SweepHold],
        help="quantity held at corner A",
    )
    sweep.add_argument(
        "--F-high", dest="anchor_force", type=float, help="held F_high"
    )
    sweep.add_argument("--workers", type=int, help="worker processes")

    bump = common.add_argument_group("isothermal")
    bump.add_argument(
        "--bump", choices=[b.value for b in BumpKind], help="dB or dJ"
    )
    bump.add_argument("--step", type=float, help="bump size")

    run = common.add_argument_group("run")
    run.add_argument("--tol-root", dest="tol_root", type=float)
    run.add_argument("--tol-quad", dest="tol_quad", type=float)
    run.add_argument("--format", choices=[f.value for f in OutputFormat])
    run.add_argument("--output", help="write results here, not stdout")
    run.add_argument(
        "--oracle",
        action="store_true",
        help="report from path quadrature instead of closed forms",
    )

    parser = _ArgumentParser(
        prog="spin-brayton",
        description="Quantum Brayton cycles of one spin or a spin pair.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, text in (
        (Command.EVAL, "report heats, work and efficiencies of one cycle"),
        (Command.CORNERS, "solve the four corners of one cycle"),
        (Command.SWEEP, "sweep J/B at corner A"),
        (Command.ISOTHERMAL, "heat directions of an isothermal bump"),
        (Command.VERIFY, "run the invariant suite"),
    ):
        subparsers.add_parser(command.value, parents=[common], help=text)
    return parser


def load_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse flags, merge them over the optional JSON file and validate."""
    flags = vars(build_parser().parse_args(argv))
    values: dict[str, Any] = {}

    config_file = flags.pop("config", None)
    if config_file is not None:
        path = pathlib.Path(config_file)
        try:
            values.update(json.loads(path.read_text()))
        except OSError as exc:
            raise ConfigurationError(
                f"Cannot read config file {path}: {exc}"
            ) from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"Config file {path} is not valid JSON: {exc}"
            ) from exc

    values.update(flags.pop("vary_j", {}))
    values.update(flags)
    return RunConfig.model_validate(values)


def _render(payload: Any, output_format: OutputFormat) -> str:
    if output_format is OutputFormat.JSON:
        return to_json(payload)
    if not isinstance(payload, BaseModel):
        raise ConfigurationError("CSV output needs a flat result")
    record = round_significant(payload.model_dump(mode="json"))
    if any(isinstance(v, (dict, list)) for v in record.values()):
        raise ConfigurationError(
            f"CSV output is not available for {type(payload).__name__}; "
            "use --format json"
        )
    return pd.DataFrame([record]).to_csv(
        index=False, na_rep="", lineterminator="\n"
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    pathlib.Path(output).write_text(text)
    logger.info("Results written to %s", output)


def run(config: RunConfig) -> int:
    """Execute one validated configuration and return the exit code."""
    tol = config.tolerances(settings.default_tolerances())
    solver = BraytonCycleSolver(tol)

    if config.command is Command.EVAL:
        spec = build_spec(config.cycle_request())
        _, report = solver.evaluate(spec, oracle=config.oracle)
        _emit(_render(report, config.format), config.output)

    elif config.command is Command.CORNERS:
        corners = solver.solve_corners(build_spec(config.cycle_request()))
        _emit(_render(corners, config.format), config.output)

    elif config.command is Command.SWEEP:
        spec = build_sweep_spec(config.sweep_request())
        rows = SweepRunner(solver, config.workers).run(spec)
        if config.format is OutputFormat.CSV:
            text = SweepRunner.to_csv(rows)
        else:
            text = to_json(rows)
        _emit(text, config.output)

    elif config.command is Command.ISOTHERMAL:
        request = config.isothermal_request()
        analyzer = IsothermalAnalyzer(tol, solver.integrator)
        result = analyzer.isothermal_heat_directions(
            request.B,
            request.J,
            request.anchor_beta,
            request.bump,
            request.step,
        )
        _emit(_render(result, config.format), config.output)

    else:
        summary = InvariantSuite(tol).run_suite()
        _emit(_render(summary, OutputFormat.JSON), config.output)
        if not summary.passed:
            logger.error(
                "%d of %d invariant checks failed",
                summary.failed, len(summary.checks),
            )
            return EXIT_VERIFY_FAILED
        logger.info("All %d invariant checks passed", len(summary.checks))

    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(load_config(argv))
    except (ValidationError, DomainError, ConfigurationError) as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_INVALID
    except NumericalError as exc:
        logger.error(
            "Numerical failure: %s (parameters: %s)", exc, exc.parameters
        )
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
