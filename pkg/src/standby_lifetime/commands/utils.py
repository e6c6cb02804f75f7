"""Common utilities for CLI commands"""

import json
import logging
import os
from pathlib import Path
from typing import Iterable, List, Optional

import typer
from rich.console import Console

from standby_lifetime.config_models import OUTPUT_DIR_ENV, OutputFormat, RunConfig, apply_overrides, load_config
from standby_lifetime.errors import ConfigError, DomainError, NumericalFailure, StandbyLifetimeError

logger = logging.getLogger(__name__)

console = Console()

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

ConfigPath = typer.Option(..., "--config", "-c", help="Path to the run configuration (JSON or YAML)")
SeedOption = typer.Option(None, "--seed", help="Override the configured seed")
SamplesOption = typer.Option(None, "--samples", help="Override the configured number of samples")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (overrides env and config)")
FormatOption = typer.Option(None, "--format", "-f", help="Comma-separated output formats: csv,json,svg")


def parse_formats(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [part.strip().lower() for part in value.split(",") if part.strip()]


def load_run_config(
    path: Path, seed: Optional[int], samples: Optional[int], out: Optional[Path], formats: Optional[str]
) -> RunConfig:
    """Read the configuration file and apply flag and environment overrides"""
    config = apply_overrides(load_config(path), seed=seed, samples=samples, out=out, formats=parse_formats(formats))
    logger.info(f"Effective configuration {config.config_hash()[:12]}: {config.echo()}")
    return config


def wants(config: RunConfig, fmt: OutputFormat) -> bool:
    return fmt in config.output.formats


def exit_code(e: Exception) -> int:
    if isinstance(e, (ConfigError, DomainError)):
        return EXIT_VALIDATION
    if isinstance(e, NumericalFailure):
        return EXIT_NUMERICAL
    if isinstance(e, OSError):
        return EXIT_IO
    return EXIT_INTERNAL


def error_record(e: Exception) -> dict:
    if isinstance(e, StandbyLifetimeError):
        return e.to_record()
    if isinstance(e, OSError):
        return {"error": "io_error", "message": str(e), "details": {"path": str(e.filename or "")}}
    return {"error": "internal_error", "message": str(e), "details": {"type": type(e).__name__}}


def handle_error(e: Exception, out_dir: Optional[Path] = None, config: Optional[RunConfig] = None) -> None:
    """Print the JSON error record, write it to <out>/error.json and exit with the mapped code.

    The record carries the config hash and seed once the configuration has loaded, null before.
    """
    if isinstance(e, typer.Exit):
        raise e
    record = error_record(e)
    record["config_hash"] = config.config_hash() if config is not None else None
    record["seed"] = config.seed if config is not None else None
    code = exit_code(e)
    logger.debug(f"Command failed with exit code {code}", exc_info=e)
    console.print(f"[red]Error: {record['message']}[/red]", highlight=False)
    console.print_json(data=record)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as write_error:
            logger.warning(f"Could not write error record to {out_dir}: {write_error}")
    raise typer.Exit(code)


def warn_unsupported_formats(config: RunConfig, supported: Iterable[OutputFormat]) -> None:
    """Warn about requested formats the command does not produce"""
    ignored = [f.value for f in config.output.formats if f not in set(supported)]
    if ignored:
        logger.warning(f"Ignoring unsupported output formats: {ignored}")
        names = ", ".join(ignored)
        console.print(f"[yellow]Warning: this command does not write {names}[/yellow]")


def output_dir_hint(out: Optional[Path]) -> Optional[Path]:
    """Where to put error.json before the configuration is known"""
    if out is not None:
        return out
    env = os.environ.get(OUTPUT_DIR_ENV)
    return Path(env) if env else None
