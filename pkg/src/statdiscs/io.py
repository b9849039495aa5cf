"""Scenario parsing and deterministic report / CSV writers."""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .discs import grid
from .geometry import (MAX_WEIGHTED_DEGREE, HermitianPencil, MonomialTerm,
                       PerturbationPolynomial)

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).with_name("schema") / "report.schema.json"


class ConfigError(ValueError):
    """Malformed scenario configuration."""


def _complex_matrix(rows, where):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{where}: expected an n x n array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_vector(items, where):
    try:
        arr = np.array(items, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: entries must be [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(f"{where}: expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def parse_pencil(data):
    if not isinstance(data, list) or not data:
        raise ConfigError("pencil: expected a non-empty list of matrices")
    mats = [_complex_matrix(m, f"pencil[{j}]") for j, m in enumerate(data)]
    try:
        return HermitianPencil(mats)
    except ValueError as exc:
        raise ConfigError(f"pencil: {exc}") from exc


def parse_perturbation(data, n, d):
    """Perturbation terms; components are numbered from 1 in the file."""
    data = data or {}
    max_degree = int(data.get("max_degree", MAX_WEIGHTED_DEGREE))
    terms = []
    for k, item in enumerate(data.get("terms", [])):
        try:
            exps = item.get("exponents", {})
            terms.append(MonomialTerm(
                int(item["component"]) - 1, float(item["coefficient"]),
                tuple(int(e) for e in exps.get("reZ", [0] * n)),
                tuple(int(e) for e in exps.get("imZ", [0] * n)),
                tuple(int(e) for e in exps.get("imW", [0] * d))))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"perturbation term {k}: {exc}") from exc
    try:
        poly = PerturbationPolynomial(n, d, terms, max_degree)
    except ValueError as exc:
        raise ConfigError(f"perturbation: {exc}") from exc
    return poly, float(data.get("t", 0.0))


def load_scenario(path):
    """Read a scenario file; raises ConfigError on any parse problem."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    if "pencil" not in data:
        raise ConfigError("scenario lacks a pencil")
    return data


def jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def dumps_report(report):
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(report, out_dir, name="report.json"):
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report))
    return path


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_boundary_trace(path, samples):
    """Boundary values (components x grid) as rows ``theta, component, re, im``."""
    samples = np.asarray(samples, dtype=complex)
    theta = np.angle(grid(samples.shape[1])) % (2 * np.pi)
    rows = [(repr(float(theta[m])), k, repr(float(samples[k, m].real)),
             repr(float(samples[k, m].imag)))
            for k in range(samples.shape[0]) for m in range(samples.shape[1])]
    return _write_rows(path, ["theta", "component", "re", "im"], rows)


def write_solver_trace(path, trace):
    rows = [(it, repr(float(res)), repr(float(step))) for it, res, step in trace]
    return _write_rows(path, ["iteration", "residual", "step"], rows)


def write_singular_values(path, values):
    rows = [(k, repr(float(v))) for k, v in enumerate(values)]
    return _write_rows(path, ["index", "singular_value"], rows)


def write_residuals(path, rows_by_theta):
    """Residual array (rows x grid) keyed by ``row, theta``."""
    arr = np.asarray(rows_by_theta)
    theta = np.angle(grid(arr.shape[1])) % (2 * np.pi)
    rows = [(r, repr(float(theta[m])), repr(float(arr[r, m])))
            for r in range(arr.shape[0]) for m in range(arr.shape[1])]
    return _write_rows(path, ["row", "theta", "value"], rows)


def load_schema():
    return json.loads(SCHEMA_PATH.read_text())


__all__ = [
    "ConfigError", "SCHEMA_PATH", "SCHEMA_VERSION", "dumps_report", "jsonable", "load_scenario",
    "load_schema", "parse_pencil", "parse_perturbation", "write_boundary_trace",
    "write_report", "write_residuals", "write_singular_values", "write_solver_trace",
]
