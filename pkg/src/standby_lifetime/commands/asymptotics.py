"""Fast-repair convergence sweep command"""

from pathlib import Path
from typing import Optional

from rich.table import Table

from standby_lifetime.asym import AsymptoticReport, convergence_sweep
from standby_lifetime.config_models import OutputFormat, RunConfig
from standby_lifetime.reports import write_csv, write_json, write_sweep_svg

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

SWEEP_COLUMNS = ["mu", "epsilon", "ks_scaled", "scaled_mean_ratio", "lst_gap"]


def sweep(
    config_file: Path = ConfigPath,
    seed: Optional[int] = SeedOption,
    samples: Optional[int] = SamplesOption,
    out: Optional[Path] = OutOption,
    formats: Optional[str] = FormatOption,
):
    """
    Measure convergence of eps^(n-1) tau_j0 to the exponential limit over sweep.mu_list

    Example:
        standby-lifetime sweep --config sweep.yaml --format csv,json,svg
    """
    out_dir = output_dir_hint(out)
    config = None
    try:
        config = load_run_config(config_file, seed, samples, out, formats)
        out_dir = config.output.directory
        run_sweep(config)
    except Exception as e:
        handle_error(e, out_dir, config)


def run_sweep(config: RunConfig) -> AsymptoticReport:
    report = convergence_sweep(
        config.system_config(),
        config.j0,
        config.sweep.mu_list,
        config.samples,
        config.seed,
        s_grid=config.sweep.s_grid,
        engine=config.engine,
        workers=config.workers,
    )
    digest = config.config_hash()
    out_dir = config.output.directory

    if wants(config, OutputFormat.CSV):
        rows = ([getattr(row, c) for c in SWEEP_COLUMNS] for row in report.rows)
        write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, rows, digest, config.seed)
    if wants(config, OutputFormat.JSON):
        payload = report.model_dump(mode="json", exclude={"config"})
        payload.update(config=config.echo(), system=report.config)
        write_json(out_dir / "sweep.json", payload, digest, config.seed)
    if wants(config, OutputFormat.SVG):
        write_sweep_svg(out_dir / "sweep.svg", report, digest, config.seed)

    table = Table(title=f"Convergence of eps^(n-1) tau_{report.j} (n={report.config['n']})")
    for column, style in zip(SWEEP_COLUMNS, ("cyan", "magenta", "green", "green", "blue")):
        table.add_column(column, style=style)
    for row in report.rows:
        ks = "skipped" if row.ks_scaled is None else f"{row.ks_scaled:.4f}"
        table.add_row(f"{row.mu:g}", f"{row.epsilon:.4e}", ks, f"{row.scaled_mean_ratio:.4f}", f"{row.lst_gap:.3e}")
    console.print(table)
    return report
