"""CSV / JSON file formats.

Floats in CSV files are written with 17 significant digits; JSON uses
Python's shortest round-trip representation.  Both are byte-stable across
runs for identical inputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridError, ShapeError
from .hardy import EnergyGrid, Rational, WaveFunction

__all__ = [
    "fmt",
    "write_json",
    "write_wavefunction_csv",
    "read_wavefunction_csv",
    "wavefunction_to_json",
    "wavefunction_from_json",
    "load_wavefunction",
    "write_curve",
    "read_curve_csv",
    "compare_golden",
    "write_operator_sweep",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n")


def write_wavefunction_csv(f: WaveFunction, path) -> None:
    lines = ["E,re,im"]
    for e, v in zip(f.grid.energies, f.samples):
        lines.append(f"{fmt(e)},{fmt(v.real)},{fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_wavefunction_csv(path) -> WaveFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["E", "re", "im"]:
        raise ConfigError(f"{path}: expected header 'E,re,im'")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 3 or len(data) < 2:
        raise ConfigError(f"{path}: need at least two rows of E,re,im")
    e = data[:, 0]
    grid = EnergyGrid(float(e[0]), float(e[-1]), len(e))
    if not np.allclose(e, grid.energies, rtol=0, atol=1e-9 * max(1.0, np.max(np.abs(e)))):
        raise GridError(f"{path}: energies must form a uniform grid")
    return WaveFunction(grid, data[:, 1] + 1j * data[:, 2])


def wavefunction_to_json(f: WaveFunction) -> dict:
    out = {
        "grid": f.grid.to_dict(),
        "samples": [[float(v.real), float(v.imag)] for v in f.samples],
    }
    if f.closed_form is not None:
        out["closed_form"] = f.closed_form.to_dict()
    return out


def wavefunction_from_json(d: dict) -> WaveFunction:
    try:
        grid = EnergyGrid.from_dict(d["grid"])
        s = np.asarray(d["samples"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed wave-function JSON ({exc})") from exc
    if s.shape != (grid.n, 2):
        raise ShapeError(f"samples must be {grid.n} [re, im] pairs")
    cf = Rational.from_dict(d["closed_form"]) if d.get("closed_form") else None
    return WaveFunction(grid, s[:, 0] + 1j * s[:, 1], cf)


def load_wavefunction(path) -> WaveFunction:
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            return wavefunction_from_json(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return read_wavefunction_csv(path)


def write_curve(times, values, path, sidecar: dict | None = None) -> None:
    """``t,P`` CSV plus an optional JSON sidecar next to it."""
    path = Path(path)
    lines = ["t,P"] + [f"{fmt(t)},{fmt(v)}" for t, v in zip(times, values)]
    path.write_text("\n".join(lines) + "\n")
    if sidecar is not None:
        write_json(sidecar, path.with_suffix(".json"))


def read_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]][:2] != ["t", "P"]:
        raise ConfigError(f"{path}: expected header 't,P'")
    data = np.array([[float(c) for c in r[:2]] for r in rows[1:] if r], dtype=float)
    return data[:, 0], data[:, 1]


def compare_golden(times, values, golden_path, rtol: float = 1e-8) -> list[str]:
    """Per-point relative comparison; returns human-readable mismatches."""
    gt, gv = read_curve_csv(golden_path)
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if gt.shape != times.shape or not np.allclose(gt, times, rtol=1e-12, atol=1e-300):
        return [f"time grid differs from golden file {golden_path}"]
    problems = []
    for t, v, g in zip(times, values, gv):
        scale = max(abs(g), 1e-300)
        if abs(v - g) > rtol * scale:
            problems.append(f"t={fmt(t)}: got {fmt(v)}, golden {fmt(g)}")
    return problems


def write_operator_sweep(times, matrices, path) -> None:
    """Row-major ``t,re_00,im_00,re_01,...`` CSV of a sequence of matrices."""
    mats = [np.asarray(m) for m in matrices]
    if not mats:
        raise ShapeError("empty sweep")
    rows, cols = mats[0].shape
    header = ["t"]
    for i in range(rows):
        for j in range(cols):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    lines = [",".join(header)]
    for t, m in zip(times, mats):
        vals = [fmt(t)]
        for x in m.ravel():
            vals += [fmt(x.real), fmt(x.imag)]
        lines.append(",".join(vals))
    Path(path).write_text("\n".join(lines) + "\n")
