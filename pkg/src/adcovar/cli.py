"""adcovar - adiabatic covariance root finding from the command line.

Runs experiments described by a JSON config file and writes CSV/JSON results.

Usage:
    adcovar [OPTIONS] <COMMAND> [ARGS]

Commands (with aliases):
    run                Run every (seed, dt, level) combination of a config
    sweep-dt (sweep)   Step-size line search per seed plus scaling fit
    spectrum (spec)    Export exact spectra along the schedule
    fit-scaling (fit)  Fit 1/dt against log(g_min) from a scaling_points.csv
"""

import json
import logging
import sys
from pathlib import Path
from typing import NoReturn

import click

from adcovar import __version__
from adcovar.config import OUTPUT_ROOT_ENV, ErrorDetail, ErrorResponse, load_config
from adcovar.errors import (
    AdcovarError,
    ArgumentError,
    CapacityError,
    ConfigError,
    DivergenceError,
    FitError,
    IllConditionedError,
    ModelSpecError,
    ScheduleRangeError,
)
from adcovar.file_handler import FileReadError, FileWriteError
from adcovar.services import fit_scaling_file, run_experiment, sweep_dt, write_spectra
from adcovar.services.linesearch_service import DEFAULT_TARGET_ERROR

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_ERROR = 1
EXIT_INVALID_ARGS = 2
EXIT_CONFIG_ERROR = 3
EXIT_NUMERICAL_ERROR = 4
EXIT_WRITE_ERROR = 5

INTERNAL_ERROR_CODE = "INTERNAL_ERROR"

# First matching class wins
EXIT_CODES: list[tuple[type[Exception], int]] = [
    (ConfigError, EXIT_CONFIG_ERROR),
    (ModelSpecError, EXIT_CONFIG_ERROR),
    (ArgumentError, EXIT_INVALID_ARGS),
    (FitError, EXIT_INVALID_ARGS),
    (FileReadError, EXIT_INVALID_ARGS),
    (ScheduleRangeError, EXIT_INVALID_ARGS),
    (CapacityError, EXIT_NUMERICAL_ERROR),
    (DivergenceError, EXIT_NUMERICAL_ERROR),
    (IllConditionedError, EXIT_NUMERICAL_ERROR),
    (FileWriteError, EXIT_WRITE_ERROR),
]

COMMAND_ALIASES = {
    "sweep": "sweep-dt",
    "spec": "spectrum",
    "fit": "fit-scaling",
}

COMMAND_GROUPS = {
    "Run": ["run", "sweep-dt"],
    "Analyze": ["spectrum", "fit-scaling"],
}

COMMAND_TO_ALIAS = {v: k for k, v in COMMAND_ALIASES.items()}


class AliasedGroup(click.Group):
    """A Click group that supports command aliases, typo suggestions, and grouped help."""

    def get_command(self, ctx, cmd_name):
        return super().get_command(ctx, COMMAND_ALIASES.get(cmd_name, cmd_name))

    def resolve_command(self, ctx, args):
        """Resolve command with typo suggestions for unknown commands."""
        try:
            return super().resolve_command(ctx, args)
        except click.UsageError as e:
            if args and "No such command" in str(e):
                suggestion = self._get_suggestion(args[0])
                if suggestion:
                    raise click.UsageError(
                        f"No such command '{args[0]}'.\n\nDid you mean: {suggestion}"
                    ) from e
            raise

    def _get_suggestion(self, cmd_name: str) -> str | None:
        import difflib

        all_names = list(self.commands.keys()) + list(COMMAND_ALIASES.keys())
        matches = difflib.get_close_matches(cmd_name, all_names, n=1, cutoff=0.6)
        return matches[0] if matches else None

    def format_commands(self, ctx, formatter):
        """Write commands in Run/Analyze groups, with their aliases."""
        lookup = {}
        for name in self.list_commands(ctx):
            cmd = self.get_command(ctx, name)
            if cmd is not None and not cmd.hidden:
                lookup[name] = cmd

        for group_name, names in COMMAND_GROUPS.items():
            rows = []
            for name in names:
                if name not in lookup:
                    continue
                alias = COMMAND_TO_ALIAS.get(name)
                display = f"{name} ({alias})" if alias else name
                rows.append((display, lookup[name].get_short_help_str(limit=formatter.width)))
            if rows:
                with formatter.section(group_name):
                    formatter.write_dl(rows)


class CliContext:
    """Shared context for CLI commands."""

    def __init__(
        self,
        output_root: Path | None,
        output_format: str,
        pretty: bool,
        verbose: bool = False,
    ):
        self.output_root = output_root
        self.output_format = output_format
        self.pretty = pretty
        self.verbose = verbose

        # Quiet by default (errors only); verbose shows progress
        logging.basicConfig(
            level=logging.INFO if verbose else logging.ERROR,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
            force=True,
        )

    def output_dir(self, configured: str) -> Path:
        """The config's output directory, placed under --output-root when given."""
        if self.output_root is None:
            return Path(configured)
        return self.output_root / configured


def format_output(ctx: CliContext, data: dict) -> str:
    """Format output data according to the specified format."""
    if ctx.output_format == "json":
        if ctx.pretty:
            return json.dumps(data, indent=2, default=str)
        return json.dumps(data, default=str)
    if ctx.output_format == "yaml":
        import yaml

        return yaml.safe_dump(data, default_flow_style=False, sort_keys=False)
    return _format_as_text(data)


def _format_as_text(data: dict, indent: int = 0) -> str:
    lines = []
    prefix = "  " * indent
    for key, value in data.items():
        if isinstance(value, dict):
            lines.append(f"{prefix}{key}:")
            lines.append(_format_as_text(value, indent + 1))
        elif isinstance(value, list):
            lines.append(f"{prefix}{key}:")
            for item in value:
                if isinstance(item, dict):
                    lines.append(_format_as_text(item, indent + 1))
                else:
                    lines.append(f"{prefix}  - {item}")
        else:
            lines.append(f"{prefix}{key}: {value}")
    return "\n".join(lines)


def exit_code_for(error: Exception) -> int:
    for kind, code in EXIT_CODES:
        if isinstance(error, kind):
            return code
    return EXIT_ERROR


def _fail(error: Exception) -> NoReturn:
    """Report an error as JSON on stderr and exit with its code."""
    if not isinstance(error, AdcovarError):
        logger.info("unexpected %s", type(error).__name__, exc_info=error)
    code = error.code if isinstance(error, AdcovarError) else INTERNAL_ERROR_CODE
    details = dict(getattr(error, "details", None) or {})
    if getattr(error, "field", ""):
        details["field"] = error.field
    if isinstance(error, DivergenceError) and error.t is not None:
        details["t"] = error.t
    message = str(error) or type(error).__name__
    response = ErrorResponse(
        error=ErrorDetail(code=code, message=message, details=details or None)
    )
    click.echo(response.model_dump_json(), err=True)
    sys.exit(exit_code_for(error))


def _parse_candidates(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentError(
            f"--candidates is not a comma-separated list of numbers: {text}"
        ) from e


pass_context = click.make_pass_decorator(CliContext)


@click.group(
    cls=AliasedGroup,
    epilog="""
\b
Examples:
  adcovar run experiments/maxcut.json          # Run a config
  adcovar sweep experiments/spin.json          # Step-size line search
  adcovar --format json fit results/scaling_points.csv
""",
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["json", "yaml", "text"]),
    default="text",
    help="Output format (default: text)",
)
@click.option(
    "--pretty",
    is_flag=True,
    default=False,
    help="Pretty-print JSON output",
)
@click.option(
    "--verbose", "-v",
    is_flag=True,
    default=False,
    help="Log progress to stderr (default: only errors are shown)",
)
@click.option(
    "--output-root",
    type=click.Path(file_okay=False, dir_okay=True, path_type=Path),
    envvar=OUTPUT_ROOT_ENV,
    default=None,
    help=f"Directory the config's output_dir is placed under (env: {OUTPUT_ROOT_ENV})",
)
@click.version_option(version=__version__, prog_name="adcovar")
@click.pass_context
def cli(ctx, output_format: str, pretty: bool, verbose: bool, output_root: Path | None):
    """adcovar - adiabatic covariance root finding.

    Prepare eigenstates of spin Hamiltonians by morphing an easy Hamiltonian
    into the target and solving for vanishing covariances at every step.
    """
    ctx.obj = CliContext(output_root, output_format, pretty, verbose)


@cli.command(epilog="""
Examples:
  adcovar run config.json                    # Write trajectories and metadata
  adcovar --output-root /tmp/out run config.json
""")
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@pass_context
def run(ctx: CliContext, config_file: Path):
    """Run every (seed, dt, level) combination of a config."""
    try:
        config = load_config(config_file)
        result = run_experiment(config, ctx.output_dir(config.output_dir))
    except Exception as e:
        _fail(e)
    click.echo(format_output(ctx, result))


@cli.command(
    "sweep-dt",
    epilog="""
Examples:
  adcovar sweep-dt config.json --candidates 0.2,0.1,0.05
  adcovar sweep config.json --target-error 0.001
""",
)
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--target-error",
    type=float,
    default=DEFAULT_TARGET_ERROR,
    show_default=True,
    help="Accept a step when the final energy error is at most this",
)
@click.option(
    "--candidates",
    default=None,
    help="Comma-separated descending steps (default: the config's delta_t list)",
)
@pass_context
def sweep_dt_command(
    ctx: CliContext, config_file: Path, target_error: float, candidates: str | None
):
    """Step-size line search for every seed, then fit 1/dt vs log(g_min)."""
    try:
        dt_candidates = _parse_candidates(candidates)
        config = load_config(config_file)
        result = sweep_dt(
            config, target_error, dt_candidates,
            output_dir=ctx.output_dir(config.output_dir),
        )
    except Exception as e:
        _fail(e)
    click.echo(format_output(ctx, result))


@cli.command(epilog="""
Examples:
  adcovar spectrum config.json --grid-points 101
""")
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--grid-points",
    type=click.IntRange(min=2),
    default=None,
    help="Points on the s grid (default: the config's gap_grid_points)",
)
@pass_context
def spectrum(ctx: CliContext, config_file: Path, grid_points: int | None):
    """Export exact spectra along the schedule for every seed."""
    try:
        config = load_config(config_file)
        result = write_spectra(config, ctx.output_dir(config.output_dir), grid_points)
    except Exception as e:
        _fail(e)
    click.echo(format_output(ctx, result))


@cli.command("fit-scaling", epilog="""
Examples:
  adcovar fit-scaling results/scaling_points.csv
  adcovar fit-scaling results/scaling_points.csv --layers 6
""")
@click.argument("csv_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--layers",
    "num_layers",
    type=click.IntRange(min=1),
    default=None,
    help="Fit only the rows of this circuit depth",
)
@pass_context
def fit_scaling(ctx: CliContext, csv_file: Path, num_layers: int | None):
    """Fit 1/dt = a ln(g_min) + b to a scaling_points.csv."""
    try:
        result = fit_scaling_file(csv_file, num_layers=num_layers)
    except Exception as e:
        _fail(e)
    click.echo(format_output(ctx, result))


if __name__ == "__main__":
    cli()
