"""Report files written by the CLI

Every CSV starts with a ``# config_hash=<sha256>,seed=<seed>`` line, the SVG
holds the same text in its description metadata and every JSON document
carries ``config_hash`` and ``seed`` fields. Floats are written with ``repr``
precision, JSON with sorted keys, and SVG with a fixed hash salt and no date,
so identical inputs give byte-identical files.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from standby_lifetime.asym import AsymptoticReport, exponential_limit_cdf

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "standby-lifetime"
PLOT_POINTS = 200


def _provenance(config_hash: str, seed: int) -> str:
    return f"config_hash={config_hash},seed={seed}"


def _header(config_hash: str, seed: int) -> str:
    return f"# {_provenance(config_hash, seed)}\n"


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str, seed: int
) -> Path:
    """Write a CSV report preceded by the provenance comment line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(_header(config_hash, seed))
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    """Rows of a report written by write_csv, without the provenance line"""
    with open(path, "r", newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(path: Path, payload: Dict[str, Any], config_hash: str, seed: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {**payload, "config_hash": config_hash, "seed": seed}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_sweep_svg(path: Path, report: AsymptoticReport, config_hash: str, seed: int) -> Optional[Path]:
    """Scaled ECDFs of every simulated row against the limit CDF 1 - e^{-t/b}.

    The provenance line goes into the SVG description metadata.
    Returns None when no row was simulated.
    """
    if not report.scaled_samples:
        logger.warning("No simulated sweep rows; skipping SVG")
        return None
    b = float(report.config["b"])

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot()
    t_max = 5.0 * b
    t = np.linspace(0.0, t_max, PLOT_POINTS)
    for mu, samples in sorted(report.scaled_samples.items()):
        # ECDF on the plot grid; samples are sorted
        ecdf = np.searchsorted(samples, t, side="right") / samples.size
        ax.step(t, ecdf, where="post", linewidth=1.0, label=f"mu={mu:g}")
    ax.plot(t, exponential_limit_cdf(t, b), color="black", linestyle="--", label="1 - exp(-t/b)")
    ax.set_xlim(0.0, t_max)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("scaled lifetime eps^(n-1) tau")
    ax.set_ylabel("CDF")
    ax.set_title(f"n={report.config['n']}, j={report.j}, {report.sample_count} samples per row")
    ax.grid(True)
    ax.legend(loc="lower right")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": _provenance(config_hash, seed)})
    logger.info(f"Wrote {path}")
    return path
