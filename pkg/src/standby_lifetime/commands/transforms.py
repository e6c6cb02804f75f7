"""Transform and inversion commands"""

from pathlib import Path
from typing import List, Optional

from rich.table import Table

from standby_lifetime.config_models import OutputFormat, RunConfig
from standby_lifetime.invert import invert_curve
from standby_lifetime.lst import mean_lifetimes, solve_phis
from standby_lifetime.reports import write_csv, write_json

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

# default inversion grid, in multiples of E tau_j0
T_GRID_MULTIPLES = (0.25, 0.5, 1.0, 2.0, 4.0)


def lst(
    config_file: Path = ConfigPath,
    seed: Optional[int] = SeedOption,
    samples: Optional[int] = SamplesOption,
    out: Optional[Path] = OutOption,
    formats: Optional[str] = FormatOption,
):
    """
    Solve the transform system at the configured arguments s

    Example:
        standby-lifetime lst --config run.json
    """
    out_dir = output_dir_hint(out)
    config = None
    try:
        config = load_run_config(config_file, seed, samples, out, formats)
        out_dir = config.output.directory
        run_lst(config)
    except Exception as e:
        handle_error(e, out_dir, config)


def run_lst(config: RunConfig) -> None:
    warn_unsupported_formats(config, (OutputFormat.CSV, OutputFormat.JSON))
    system = config.system_config()
    solutions = [solve_phis(system, s) for s in config.lst.arguments()]
    means = mean_lifetimes(system)
    digest = config.config_hash()
    out_dir = config.output.directory

    rows = [
        (sol.s.real, sol.s.imag, j, phi.real, phi.imag, sol.residual)
        for sol in solutions
        for j, phi in enumerate(complex(p) for p in sol.phis)
    ]
    if wants(config, OutputFormat.CSV):
        columns = ["re_s", "im_s", "j", "re_phi", "im_phi", "residual"]
        write_csv(out_dir / "lst.csv", columns, rows, digest, config.seed)
    if wants(config, OutputFormat.JSON):
        payload = {
            "config": config.echo(),
            "mean_lifetimes": [float(m) for m in means],
            "points": [
                {"re_s": r[0], "im_s": r[1], "j": r[2], "re_phi": r[3], "im_phi": r[4], "residual": r[5]}
                for r in rows
            ],
        }
        write_json(out_dir / "lst.json", payload, digest, config.seed)

    table = Table(title=f"phi_j(s) (n={system.n}, mu={system.mu:g})")
    table.add_column("s", style="cyan")
    table.add_column("j", style="magenta")
    table.add_column("phi_j(s)", style="green")
    table.add_column("residual", style="blue")
    for re_s, im_s, j, re_phi, im_phi, residual in rows:
        table.add_row(f"{complex(re_s, im_s):.4g}", str(j), f"{complex(re_phi, im_phi):.8g}", f"{residual:.2e}")
    console.print(table)
    console.print("Mean lifetimes: " + ", ".join(f"E tau_{j} = {m:.6g}" for j, m in enumerate(means)))


def invert(
    config_file: Path = ConfigPath,
    seed: Optional[int] = SeedOption,
    samples: Optional[int] = SamplesOption,
    out: Optional[Path] = OutOption,
    formats: Optional[str] = FormatOption,
):
    """
    Invert phi_j0 into the lifetime CDF on a time grid

    Without inversion.t_grid the grid is (0.25, 0.5, 1, 2, 4) times E tau_j0.

    Example:
        standby-lifetime invert --config run.json --format csv
    """
    out_dir = output_dir_hint(out)
    config = None
    try:
        config = load_run_config(config_file, seed, samples, out, formats)
        out_dir = config.output.directory
        run_invert(config)
    except Exception as e:
        handle_error(e, out_dir, config)


def default_t_grid(config: RunConfig) -> List[float]:
    mean = float(mean_lifetimes(config.system_config())[config.j0])
    return [m * mean for m in T_GRID_MULTIPLES]


def run_invert(config: RunConfig) -> None:
    warn_unsupported_formats(config, (OutputFormat.CSV, OutputFormat.JSON))
    system = config.system_config()
    settings = config.inversion.settings()
    t_grid = config.inversion.t_grid or default_t_grid(config)
    curve = invert_curve(system, config.j0, t_grid, settings)
    digest = config.config_hash()
    out_dir = config.output.directory
    method = settings.method.value

    if wants(config, OutputFormat.CSV):
        rows = ((p.t, config.j0, p.value, method, ";".join(p.flags)) for p in curve.points)
        write_csv(out_dir / "invert.csv", ["t", "j", "cdf", "method", "flags"], rows, digest, config.seed)
    if wants(config, OutputFormat.JSON):
        payload = {
            "config": config.echo(),
            "j": config.j0,
            "method": method,
            "terms": settings.effective_terms,
            "monotonicity_violations": curve.monotonicity_violations,
            "points": [
                {"t": p.t, "cdf": p.value, "raw": p.raw, "oscillation": p.oscillation, "flags": p.flags}
                for p in curve.points
            ],
        }
        write_json(out_dir / "invert.json", payload, digest, config.seed)

    table = Table(title=f"P(tau_{config.j0} <= t), {method}")
    table.add_column("t", style="cyan")
    table.add_column("CDF", style="green")
    table.add_column("oscillation", style="blue")
    table.add_column("flags", style="yellow")
    for p in curve.points:
        table.add_row(f"{p.t:.6g}", f"{p.value:.6f}", f"{p.oscillation:.2e}", ",".join(p.flags) or "-")
    console.print(table)
    if curve.unstable:
        console.print("[yellow]Warning: some points are flagged; see the flags column[/yellow]")
