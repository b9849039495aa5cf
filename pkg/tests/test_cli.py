import csv
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from statdiscs import io as sio
from statdiscs.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _run(args, capsys):
    code = main(args)
    return code, capsys.readouterr().out


def test_indices_prints_maslov(capsys):
    code, out = _run(["indices", "--config", str(SCENARIOS / "quadric11.json")], capsys)
    assert code == 0
    assert "maslov=4" in out
    assert "partial_indices=0,1,1,2" in out


def test_kernel_prints_dimensions(capsys):
    code, out = _run(["kernel", "--config", str(SCENARIOS / "quadric11.json")], capsys)
    assert code == 0
    assert "constrained dim 4, unconstrained dim 8" in out


def test_check_on_c8_example(capsys):
    code, out = _run(["check", "--config", str(SCENARIOS / "c8example.json")], capsys)
    assert code == 0
    assert "fully=false" in out and "beloshapka=true" in out


def test_centers_on_c8_example_are_rank_deficient(capsys):
    code, out = _run(["centers", "--config", str(SCENARIOS / "c8example.json")], capsys)
    assert code == 0
    assert "center_rank=14/16" in out


def test_run_writes_valid_report_and_csvs(tmp_path, capsys):
    code = main(["run", "--config", str(SCENARIOS / "quadric11.json"), "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(report, sio.load_schema())
    results = report["results"]
    assert results["check"]["beloshapka"] and results["check"]["fully"]
    assert results["indices"]["maslov"] == 4
    assert results["indices"]["partial_indices"] == [0, 1, 1, 2]
    assert report["seed"] == 0 and report["passed"]
    with open(tmp_path / "boundary_trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta", "component", "re", "im"]
    assert len(rows) == 1 + 4 * 256
    with open(tmp_path / "kernel_constrained_singular_values.csv") as fh:
        assert next(csv.reader(fh)) == ["index", "singular_value"]
    with open(tmp_path / "disc_residuals.csv") as fh:
        assert next(csv.reader(fh)) == ["row", "theta", "value"]


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--config", str(SCENARIOS / "quadric11.json"), "--out", str(out),
                     "--seed", "7"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert json.loads((a / "report.json").read_text())["seed"] == 7


def test_solver_scenario(tmp_path):
    code = main(["solve", "--config", str(SCENARIOS / "cubic11.json"), "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(report, sio.load_schema())
    assert report["results"]["solve"]["final_residual"] < 1e-11
    with open(tmp_path / "solver_trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iteration", "residual", "step"] and len(rows) > 2


@pytest.mark.parametrize("name", sorted(p.stem for p in SCENARIOS.glob("*.json")))
def test_every_shipped_scenario_validates(name, tmp_path):
    code = main(["run", "--config", str(SCENARIOS / f"{name}.json"), "--out", str(tmp_path)])
    assert code == 0
    jsonschema.validate(json.loads((tmp_path / "report.json").read_text()), sio.load_schema())


def test_empty_analysis_list_echoes_inputs(tmp_path):
    assert main(["run", "--config", str(SCENARIOS / "empty.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["results"] == {} and report["inputs"]["n"] == 1


def _write(tmp_path, payload):
    path = tmp_path / "scenario.json"
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


@pytest.mark.parametrize("payload", [
    "{not json",
    {"analyses": ["check"]},
    {"pencil": [[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]]},
    {"pencil": [[[[1, 0]]]], "analyses": ["plot"]},
    {"pencil": [[[[1, 0]]]], "perturbation": {"terms": [
        {"component": 1, "coefficient": 1, "exponents": {"reZ": [1]}}]}},
    {"pencil": [[[[1, 0]]]], "solver": {"nf": 64, "M": 64}},
])
def test_config_errors_exit_2(tmp_path, payload):
    assert main(["check", "--config", _write(tmp_path, payload)]) == 2


def test_failed_analysis_exits_1_with_report(tmp_path):
    config = _write(tmp_path, {"pencil": [[[[0, 0]]]], "analyses": ["check", "solve"]})
    out = tmp_path / "out"
    assert main(["run", "--config", config, "--out", str(out)]) == 1
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, sio.load_schema())
    assert report["results"]["solve"]["status"] == "skipped"
    assert not report["passed"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "statdiscs", "indices", "--config",
                           str(SCENARIOS / "quadric11.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and "maslov=4" in proc.stdout
