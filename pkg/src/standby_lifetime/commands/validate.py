"""Oracle suite command"""

from pathlib import Path
from typing import List, Optional

from rich.table import Table

from standby_lifetime.config_models import OutputFormat
from standby_lifetime.errors import ChecksFailed
from standby_lifetime.reports import write_json
from standby_lifetime.validation import CheckResult, CheckStatus, run_oracle_suite, suite_passed

from .utils import (
    ConfigPath,
    FormatOption,
    OutOption,
    SamplesOption,
    SeedOption,
    console,
    handle_error,
    load_run_config,
    output_dir_hint,
    wants,
)

STATUS_STYLE = {CheckStatus.PASS: "green", CheckStatus.FAIL: "red", CheckStatus.SKIP: "yellow"}


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def print_results(results: List[CheckResult]) -> None:
    table = Table(title="Oracle suite")
    table.add_column("Module", style="magenta")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Value", style="blue")
    table.add_column("Expected", style="blue")
    table.add_column("Tolerance", style="blue")
    table.add_column("Detail", style="white")
    for r in results:
        style = STATUS_STYLE[r.status]
        table.add_row(
            r.module,
            r.name,
            f"[{style}]{r.status.value}[/{style}]",
            _fmt(r.value),
            _fmt(r.expected),
            _fmt(r.tolerance),
            r.detail,
        )
    console.print(table)


def validate(
    config_file: Path = ConfigPath,
    seed: Optional[int] = SeedOption,
    samples: Optional[int] = SamplesOption,
    out: Optional[Path] = OutOption,
    formats: Optional[str] = FormatOption,
):
    """
    Run the built-in oracle suite and print a pass/fail table

    Exits with code 2 and writes error.json when any check fails.

    Example:
        standby-lifetime validate --config run.json
    """
    out_dir = output_dir_hint(out)
    config = None
    try:
        config = load_run_config(config_file, seed, samples, out, formats)
        out_dir = config.output.directory
        results = run_oracle_suite(config)

        if wants(config, OutputFormat.JSON):
            payload = {
                "config": config.echo(),
                "passed": suite_passed(results),
                "checks": [r.model_dump(mode="json") for r in results],
            }
            write_json(out_dir / "validate.json", payload, config.config_hash(), config.seed)
        print_results(results)

        failed = [r for r in results if r.status is CheckStatus.FAIL]
        if failed:
            raise ChecksFailed(
                f"{len(failed)} check(s) failed",
                checks=[f"{r.module}: {r.name}" for r in failed],
            )
    except Exception as e:
        handle_error(e, out_dir, config)

    console.print("[green]✓ All checks passed[/green]")
