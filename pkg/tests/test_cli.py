import importlib
import json

import pytest
from typer.testing import CliRunner

from standby_lifetime.cli import app
from standby_lifetime.reports import read_csv
from standby_lifetime.validation import CheckResult, CheckStatus

runner = CliRunner()


@pytest.fixture
def run_config(write_config, minimal_config_data):
    minimal_config_data["system"]["mu"] = 3.0
    minimal_config_data["samples"] = 2000
    return write_config(minimal_config_data)


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_no_arguments_shows_help():
    result = invoke()
    assert "simulate" in result.output
    assert "validate" in result.output


def test_simulate_writes_every_replication(run_config, tmp_path):
    out = tmp_path / "out"
    result = invoke("simulate", "--config", run_config, "--out", out, "--samples", 250)
    assert result.exit_code == 0, result.output
    rows = read_csv(out / "lifetimes.csv")
    assert len(rows) == 250
    assert [r["replication"] for r in rows[:3]] == ["0", "1", "2"]
    assert (out / "lifetimes.csv").read_text().startswith("# config_hash=")

    summary = json.loads((out / "summary.json").read_text())
    assert summary["summary"]["count"] == 250
    assert summary["seed"] == 42
    assert summary["config"]["samples"] == 250


def test_simulate_format_selection(run_config, tmp_path):
    out = tmp_path / "out"
    result = invoke("simulate", "-c", run_config, "-o", out, "--samples", 10, "--format", "json")
    assert result.exit_code == 0, result.output
    assert (out / "summary.json").exists()
    assert not (out / "lifetimes.csv").exists()


def test_validate_two_element_system(run_config, tmp_path):
    out = tmp_path / "out"
    result = invoke("validate", "--config", run_config, "--out", out)
    assert result.exit_code == 0, result.output
    assert "All checks passed" in result.output

    report = json.loads((out / "validate.json").read_text())
    assert report["passed"]
    wald = next(c for c in report["checks"] if c["name"] == "E tau_1 = b/eps")
    assert wald["status"] == "PASS"
    assert wald["value"] == pytest.approx(4.0, rel=1e-10)
    assert wald["detail"] == "E tau_1 = 4"
    statuses = {c["name"]: c["status"] for c in report["checks"]}
    assert statuses["fundamental-matrix mean = E tau_j0"] == "SKIP"


def test_lst_command(run_config, tmp_path):
    out = tmp_path / "out"
    result = invoke("lst", "--config", run_config, "--out", out)
    assert result.exit_code == 0, result.output
    document = json.loads((out / "lst.json").read_text())
    assert document["mean_lifetimes"] == pytest.approx([5.0, 4.0])
    at_zero = [p for p in document["points"] if p["re_s"] == 0.0 and p["im_s"] == 0.0]
    assert [p["re_phi"] for p in at_zero] == pytest.approx([1.0, 1.0])
    assert len(read_csv(out / "lst.csv")) == 3 * 2


def test_invert_command(write_config, minimal_config_data, tmp_path):
    minimal_config_data["inversion"] = {"t_grid": [1.0, 4.0, 16.0]}
    out = tmp_path / "out"
    result = invoke("invert", "--config", write_config(minimal_config_data), "--out", out)
    assert result.exit_code == 0, result.output
    rows = read_csv(out / "invert.csv")
    assert [float(r["t"]) for r in rows] == [1.0, 4.0, 16.0]
    cdf = [float(r["cdf"]) for r in rows]
    assert cdf == sorted(cdf)
    assert all(r["method"] == "euler" and r["flags"] == "" for r in rows)


def test_invert_default_grid(run_config, tmp_path):
    out = tmp_path / "out"
    result = invoke("invert", "--config", run_config, "--out", out, "--format", "json")
    assert result.exit_code == 0, result.output
    document = json.loads((out / "invert.json").read_text())
    assert [p["t"] for p in document["points"]] == pytest.approx([1.0, 2.0, 4.0, 8.0, 16.0])


def test_sweep_output_is_byte_identical(write_config, minimal_config_data, tmp_path):
    minimal_config_data["samples"] = 500
    minimal_config_data["sweep"] = {"mu_list": [5.0, 10.0]}
    config = write_config(minimal_config_data)
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        result = invoke("sweep", "--config", config, "--out", out, "--format", "csv,json,svg")
        assert result.exit_code == 0, result.output
    for name in ("sweep.csv", "sweep.json", "sweep.svg"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    rows = read_csv(first / "sweep.csv")
    assert list(rows[0]) == ["mu", "epsilon", "ks_scaled", "scaled_mean_ratio", "lst_gap"]
    assert [float(r["mu"]) for r in rows] == [5.0, 10.0]


def test_invalid_config_exits_with_one(write_config, minimal_config_data, tmp_path):
    minimal_config_data["system"]["n"] = 1
    out = tmp_path / "out"
    result = invoke("simulate", "--config", write_config(minimal_config_data), "--out", out)
    assert result.exit_code == 1
    assert "n ≥ 2 required, got n=1" in result.output
    record = json.loads((out / "error.json").read_text())
    assert record["error"] == "validation_error"
    assert record["config_hash"] is None
    assert record["seed"] is None


def test_unknown_key_exits_with_one(write_config, minimal_config_data, tmp_path):
    minimal_config_data["system"]["nn"] = 2
    result = invoke("lst", "--config", write_config(minimal_config_data), "--out", tmp_path)
    assert result.exit_code == 1
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "parse_error"


def test_unstable_inversion_exits_with_two(write_config, minimal_config_data, tmp_path):
    minimal_config_data["inversion"] = {"terms": 5, "t_grid": [1.0, 2.0]}
    result = invoke("invert", "--config", write_config(minimal_config_data), "--out", tmp_path)
    assert result.exit_code == 2
    record = json.loads((tmp_path / "error.json").read_text())
    assert record["error"] == "inversion_unstable"
    assert len(record["config_hash"]) == 64
    assert record["seed"] == 42


def test_missing_config_exits_with_three(tmp_path):
    result = invoke("simulate", "--config", tmp_path / "missing.json", "--out", tmp_path)
    assert result.exit_code == 3
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "io_error"


def test_output_directory_from_environment(run_config, tmp_path, monkeypatch):
    monkeypatch.setenv("STANDBY_LIFETIME_OUTPUT_DIR", str(tmp_path / "env"))
    result = invoke("simulate", "--config", run_config, "--samples", 5)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "env" / "lifetimes.csv").exists()


def test_sweep_svg_carries_provenance(write_config, minimal_config_data, tmp_path):
    minimal_config_data["samples"] = 200
    minimal_config_data["sweep"] = {"mu_list": [5.0, 10.0]}
    out = tmp_path / "out"
    result = invoke("sweep", "--config", write_config(minimal_config_data), "--out", out, "--format", "json,svg")
    assert result.exit_code == 0, result.output
    document = json.loads((out / "sweep.json").read_text())
    svg = (out / "sweep.svg").read_text()
    assert f"config_hash={document['config_hash']},seed=42" in svg


def test_failed_checks_write_error_record(run_config, tmp_path, monkeypatch):
    failing = [CheckResult(name="phi_j(0) = 1", module="lst", status=CheckStatus.FAIL, value=0.5, expected=0.0)]
    module = importlib.import_module("standby_lifetime.commands.validate")
    monkeypatch.setattr(module, "run_oracle_suite", lambda config: failing)
    out = tmp_path / "out"
    result = invoke("validate", "--config", run_config, "--out", out)
    assert result.exit_code == 2
    assert "Oracle suite" in result.output
    record = json.loads((out / "error.json").read_text())
    assert record["error"] == "checks_failed"
    assert record["details"]["checks"] == ["lst: phi_j(0) = 1"]
    assert record["seed"] == 42
    assert not json.loads((out / "validate.json").read_text())["passed"]


def test_unexpected_error_exits_with_four(run_config, tmp_path, monkeypatch):
    def broken(config):
        raise RuntimeError("unexpected state")

    module = importlib.import_module("standby_lifetime.commands.simulation")
    monkeypatch.setattr(module, "run_simulation", broken)
    result = invoke("simulate", "--config", run_config, "--out", tmp_path)
    assert result.exit_code == 4
    record = json.loads((tmp_path / "error.json").read_text())
    assert record["error"] == "internal_error"
    assert record["details"]["type"] == "RuntimeError"


@pytest.mark.parametrize("command", ["simulate", "lst"])
def test_svg_request_is_reported(run_config, tmp_path, command):
    out = tmp_path / "out"
    result = invoke(command, "--config", run_config, "--out", out, "--samples", 20, "--format", "json,svg")
    assert result.exit_code == 0, result.output
    assert "does not write svg" in result.output
    assert not list(out.glob("*.svg"))
