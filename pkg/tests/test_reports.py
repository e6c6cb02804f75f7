import json

import numpy as np
import pytest
from conftest import make_system

from standby_lifetime.asym import convergence_sweep
from standby_lifetime.reports import read_csv, write_csv, write_json, write_sweep_svg


def test_csv_provenance_and_precision(tmp_path):
    path = write_csv(tmp_path / "nested" / "out.csv", ["a", "b"], [(0.1, None), (np.float64(1 / 3), 2)], "abc", 7)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=abc,seed=7"
    assert lines[1] == "a,b"
    assert lines[2] == "0.1,"
    assert lines[3] == f"{1 / 3!r},2"
    assert read_csv(path) == [{"a": "0.1", "b": ""}, {"a": repr(1 / 3), "b": "2"}]


def test_json_fields(tmp_path):
    path = write_json(tmp_path / "out.json", {"z": 1, "a": [1.5]}, "abc", 3)
    text = path.read_text()
    assert text.endswith("}\n")
    document = json.loads(text)
    assert document == {"a": [1.5], "z": 1, "config_hash": "abc", "seed": 3}
    assert list(document) == sorted(document)


@pytest.fixture
def small_report():
    return convergence_sweep(make_system(2, 1.0), 1, [5.0, 10.0], 300, seed=2)


def test_svg_is_deterministic(tmp_path, small_report):
    first = write_sweep_svg(tmp_path / "a.svg", small_report, "abc", 2)
    second = write_sweep_svg(tmp_path / "b.svg", small_report, "abc", 2)
    assert first.read_bytes() == second.read_bytes()
    text = first.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "<dc:date>" not in text
    assert "config_hash=abc,seed=2" in text


def test_svg_needs_simulated_rows(tmp_path):
    report = convergence_sweep(make_system(4, 1.0), 1, [150.0, 200.0], 10, seed=0)
    assert write_sweep_svg(tmp_path / "sweep.svg", report, "abc", 0) is None
    assert not (tmp_path / "sweep.svg").exists()
