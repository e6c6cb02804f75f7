"""Monte Carlo lifetime command"""

from pathlib import Path
from typing import Optional

from rich.table import Table

from standby_lifetime.config_models import OutputFormat, RunConfig
from standby_lifetime.reports import write_csv, write_json
from standby_lifetime.sim import run_batch

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
    warn_unsupported_formats,
)


def simulate(
    config_file: Path = ConfigPath,
    seed: Optional[int] = SeedOption,
    samples: Optional[int] = SamplesOption,
    out: Optional[Path] = OutOption,
    formats: Optional[str] = FormatOption,
):
    """
    Simulate lifetimes tau_j0 and write them with a summary

    Example:
        standby-lifetime simulate --config run.json
        standby-lifetime simulate --config run.json --samples 100000 --seed 7
    """
    out_dir = output_dir_hint(out)
    config = None
    try:
        config = load_run_config(config_file, seed, samples, out, formats)
        out_dir = config.output.directory
        run_simulation(config)
    except Exception as e:
        handle_error(e, out_dir, config)


def run_simulation(config: RunConfig) -> None:
    warn_unsupported_formats(config, (OutputFormat.CSV, OutputFormat.JSON))
    system = config.system_config()
    emp = run_batch(system, config.j0, config.samples, config.seed, config.engine, config.workers)
    digest = config.config_hash()
    out_dir = config.output.directory

    if wants(config, OutputFormat.CSV):
        rows = ((i, float(v)) for i, v in enumerate(emp.by_replication))
        write_csv(out_dir / "lifetimes.csv", ["replication", "lifetime"], rows, digest, config.seed)
    if wants(config, OutputFormat.JSON):
        payload = {"config": config.echo(), "j0": config.j0, "summary": emp.summary().model_dump(mode="json")}
        write_json(out_dir / "summary.json", payload, digest, config.seed)

    table = Table(title=f"tau_{config.j0} (n={system.n}, mu={system.mu:g})")
    table.add_column("Statistic", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("samples", str(emp.count))
    table.add_row("mean", f"{emp.mean:.6g}")
    table.add_row("stderr", f"{emp.stderr:.3g}" if emp.stderr_defined else "-")
    for p, q in emp.summary().quantiles.items():
        table.add_row(f"quantile {p}", f"{q:.6g}")
    console.print(table)
    console.print(f"[green]✓ Wrote results to {out_dir}[/green]")
