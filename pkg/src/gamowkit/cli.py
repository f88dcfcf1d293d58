"""Command-line front end.

Exit codes: 0 success, 1 numerical-contract failure, 2 configuration error.

Every command takes a JSON ``--config`` file; explicit flags override its
keys.  Paths inside a config file are resolved relative to that file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .born import (
    breit_wigner_wavefunction,
    fit_decay_rate,
    gamow_decay_curve,
    gamow_fit_window,
    hilbert_survival_curve,
)
from .errors import CausalityError, ConfigError, GamowkitError, GridError, NotHardyError, ShapeError
from .evolution import evolve_state_operator, ket_propagator, run_evolution
from .hardy import (
    DEFAULT_TOL,
    EnergyGrid,
    HalfPlane,
    Rational,
    WaveFunction,
    hardy_membership,
)
from .io import compare_golden, load_wavefunction, write_curve, write_json, write_operator_sweep
from .jordan import (
    CompositeBasis,
    StateOperator,
    assemble_hamiltonian,
    build_W_G,
    build_W_n,
    build_W_PT,
)
from .oracles import expm_series, two_sided_evolution
from .smatrix import SMatrixModel, load_model

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

DEFAULT_TOLS = {
    "check-hardy": DEFAULT_TOL,
    "decay": 1e-10,
    "jordan-demo": 1e-12,
    "compare-unitary": 0.05,
    "evolve": 1e-12,
}
NEGATIVE_CONTROL_MIN = 0.1
GOLDEN_RTOL = 1e-8


class UsageError(Exception):
    """Configuration problem; reported with exit code 2."""


class ContractFailure(Exception):
    """Numerical contract not met; reported with exit code 1."""


# ---------------------------------------------------------------------------
# configuration


class RunConfig:
    """Merged view of the ``--config`` file and command-line flags (flags win)."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.base = Path(".")
        self.data: dict = {}
        if args.config:
            path = Path(args.config)
            if not path.is_file():
                raise UsageError(f"config file not found: {path}")
            try:
                self.data = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise UsageError(f"{path}: invalid JSON ({exc})") from exc
            if not isinstance(self.data, dict):
                raise UsageError(f"{path}: config must be a JSON object")
            self.base = path.parent

    def get(self, key: str, default=None):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        return self.data.get(key, default)

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    @property
    def out(self) -> Path:
        if self.args.out is not None:
            out = Path(self.args.out)
        elif "out" in self.data:
            out = self.path(self.data["out"])
        else:
            out = Path("gamowkit_out")
        out.mkdir(parents=True, exist_ok=True)
        return out

    def tol(self, command: str) -> float:
        value = self.get("tol", DEFAULT_TOLS[command])
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise UsageError(f"tolerance must be a number, got {value!r}") from None
        if not value > 0:
            raise UsageError(f"tolerance must be positive, got {value}")
        return value

    def model(self) -> SMatrixModel:
        if self.args.model is not None:
            path = Path(self.args.model)
        elif "model" in self.data:
            m = self.data["model"]
            if isinstance(m, dict):
                return SMatrixModel.from_dict(m)
            path = self.path(m)
        else:
            raise UsageError("no model given (use --model or the 'model' config key)")
        if not path.is_file():
            raise UsageError(f"model file not found: {path}")
        return load_model(path)

    def grid(self, default: dict | None = None) -> EnergyGrid:
        spec = self.data.get("grid", default)
        if spec is None:
            raise UsageError("no grid given (config key 'grid': {e0, e_max, n})")
        return EnergyGrid.from_dict(spec)

    def times(self, default: tuple[float, float, int]) -> np.ndarray:
        raw = self.args.times
        if raw is None and "times" in self.data:
            t = self.data["times"]
            if isinstance(t, dict):
                raw = f"{t['t0']}:{t['t1']}:{t['n']}"
            else:
                raw = str(t)
        if raw is None:
            t0, t1, n = default
        else:
            t0, t1, n = parse_times(raw)
        return np.linspace(t0, t1, n)


def parse_times(raw: str) -> tuple[float, float, int]:
    parts = str(raw).split(":")
    if len(parts) != 3:
        raise UsageError(f"--times must look like t0:t1:n, got {raw!r}")
    try:
        t0, t1, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--times must look like t0:t1:n, got {raw!r}") from None
    if n < 1 or not (math.isfinite(t0) and math.isfinite(t1)):
        raise UsageError(f"invalid time sweep {raw!r}")
    if n > 1 and not t1 > t0:
        raise UsageError(f"time sweep needs t1 > t0, got {raw!r}")
    return t0, t1, n


def require_causal(times: np.ndarray) -> None:
    if len(times) and times.min() < 0:
        raise UsageError(str(CausalityError(float(times.min()))))


def wavefunction_from_spec(spec: dict, cfg: RunConfig, grid: EnergyGrid | None) -> WaveFunction:
    if "file" in spec:
        path = cfg.path(spec["file"])
        if not path.is_file():
            raise UsageError(f"wave-function file not found: {path}")
        return load_wavefunction(path)
    if "rational" in spec:
        if grid is None:
            raise UsageError("inline rational wave functions need a 'grid'")
        return WaveFunction.from_rational(grid, Rational.from_dict(spec["rational"]))
    raise UsageError(f"wave-function spec needs 'file' or 'rational': {spec!r}")


def check_golden(cfg: RunConfig, times, values) -> list[str]:
    golden = cfg.get("golden")
    if golden is None:
        return []
    path = cfg.path(golden) if cfg.args.golden is None else Path(golden)
    if not path.is_file():
        raise UsageError(f"golden file not found: {path}")
    return compare_golden(times, values, path, GOLDEN_RTOL)


def _pole_index(cfg: RunConfig, model: SMatrixModel) -> int:
    idx = int(cfg.get("pole", 0))
    if not 0 <= idx < len(model.poles):
        raise UsageError(f"pole index {idx} out of range (model has {len(model.poles)} poles)")
    return idx


# ---------------------------------------------------------------------------
# commands


def cmd_check_hardy(cfg: RunConfig) -> int:
    tol = cfg.tol("check-hardy")
    specs = cfg.data.get("wavefunctions", [])
    if not specs:
        raise UsageError("no inputs: config lists no wavefunctions")
    grid = cfg.grid() if "grid" in cfg.data else None
    results = []
    all_met = True
    for i, spec in enumerate(specs):
        name = spec.get("name", f"wf{i}")
        expect = str(spec.get("expect", "")).lower()
        if expect not in ("upper", "lower", "both", "neither"):
            raise UsageError(f"{name}: 'expect' must be upper, lower, both or neither")
        f = wavefunction_from_spec(spec, cfg, grid)
        reports = {hp.value: hardy_membership(f, hp, tol) for hp in HalfPlane}
        got = {k for k, r in reports.items() if r.is_hardy}
        wanted = {"upper": {"upper"}, "lower": {"lower"}, "both": {"upper", "lower"},
                  "neither": set()}[expect]
        met = got == wanted
        all_met &= met
        results.append({"name": name, "expect": expect, "met": met,
                        **{k: r.to_dict() for k, r in reports.items()}})
        print(f"{name}: upper={reports['upper'].is_hardy} lower={reports['lower'].is_hardy} "
              f"expect={expect} -> {'ok' if met else 'MISMATCH'}")
    write_json({"tolerances": {"hardy": tol}, "functions": results}, cfg.out / "hardy_report.json")
    return EXIT_OK if all_met else EXIT_NUMERIC


def _default_detector(pole) -> tuple[EnergyGrid, WaveFunction]:
    grid = EnergyGrid(pole.e_r - 200 * pole.gamma, pole.e_r + 200 * pole.gamma, 4096)
    rational = Rational([1.0], [-complex(pole.e_r, -pole.gamma), 1.0])
    return grid, WaveFunction.from_rational(grid, rational)


def cmd_decay(cfg: RunConfig) -> int:
    model = cfg.model()
    if not model.poles:
        raise UsageError("decay needs a model with at least one pole")
    pole = model.poles[_pole_index(cfg, model)]
    tol = cfg.tol("decay")
    times = cfg.times((0.0, 5.0 / pole.gamma, 51))
    require_causal(times)
    operator = cfg.get("operator", "gamow")
    if operator not in ("gamow", "W_PT"):
        raise UsageError(f"--operator must be gamow or W_PT, got {operator!r}")
    if "detector" in cfg.data:
        grid = cfg.grid() if "grid" in cfg.data else None
        psi = wavefunction_from_spec(cfg.data["detector"], cfg, grid)
    else:
        _, psi = _default_detector(pole)
    try:
        curve = gamow_decay_curve(psi, pole, times, operator=operator)
    except NotHardyError as exc:
        raise ContractFailure(str(exc)) from exc
    rel = abs(curve.gamma_fit / pole.gamma - 1.0)
    sidecar = {**curve.sidecar(), "tau": curve.lifetime, "gamma_model": pole.gamma,
               "tolerances": {"gamma_relative": tol, "golden_rtol": GOLDEN_RTOL}}
    write_curve(curve.times, curve.values, cfg.out / "decay.csv", sidecar)
    print(f"gamma_fit = {curve.gamma_fit:.17g}")
    print(f"tau = {curve.lifetime:.17g}")
    problems = check_golden(cfg, curve.times, curve.values)
    if not rel <= tol:
        problems.append(f"gamma_fit deviates from model gamma by {rel:.3g} (tol {tol:g})")
    if problems:
        raise ContractFailure("; ".join(problems))
    return EXIT_OK


def _demo_operator_rows(pole, times):
    basis = CompositeBasis((pole,))
    H = assemble_hamiltonian(basis)
    gen = H.ket_action
    prop, wn, neg = [], [], []
    for t in times:
        u_ref = expm_series(-1j * t * gen)
        closed = ket_propagator(pole, t)
        prop.append([t] + [float(np.linalg.norm(closed[:, k] - u_ref[:, k])) for k in range(pole.order)])
        row = [t]
        decay = math.exp(-pole.gamma * t)
        for op in [build_W_n(pole, n) for n in range(pole.order)] + [build_W_PT(pole)]:
            evolved = evolve_state_operator(op, H, t).matrix
            row.append(float(np.linalg.norm(evolved - decay * op.matrix) / np.linalg.norm(op.matrix)))
        wn.append(row)
        dyad = np.zeros((pole.order, pole.order), dtype=complex)
        dyad[1, 1] = 1.0
        ctrl = StateOperator(basis, dyad)
        evolved = evolve_state_operator(ctrl, H, t).matrix
        oracle = two_sided_evolution(gen, dyad, t)
        # deviation measured relative to the pure-exponential prediction
        scale = decay if decay > 0 else math.nan
        neg.append([t, float(np.linalg.norm(evolved - decay * dyad) / scale),
                    float(np.linalg.norm(evolved - oracle))])
    return prop, wn, neg


def _write_table(path: Path, header: list[str], rows) -> None:
    from .io import fmt

    lines = [",".join(header)] + [",".join(fmt(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def cmd_jordan_demo(cfg: RunConfig) -> int:
    model = cfg.model()
    poles = [p for p in model.poles if p.order >= 2]
    if not poles:
        raise UsageError("demo requires r >= 2 (no pole of order >= 2 in the model)")
    tol = cfg.tol("jordan-demo")
    out = cfg.out
    full = assemble_hamiltonian(CompositeBasis(model.poles))
    write_json(full.to_dict(), out / "hamiltonian.json")
    summary = {"tolerances": {"residual": tol, "negative_control_min": NEGATIVE_CONTROL_MIN}, "poles": []}
    failures = []
    for pole in poles:
        times = cfg.times((0.0, 10.0 / pole.gamma, 21))
        require_causal(times)
        prop, wn, neg = _demo_operator_rows(pole, times)
        tag = f"pole{model.poles.index(pole)}"
        _write_table(out / f"{tag}_propagator_residuals.csv",
                     ["t"] + [f"k{k}" for k in range(pole.order)], prop)
        _write_table(out / f"{tag}_exponential_law.csv",
                     ["t"] + [f"W{n}" for n in range(pole.order)] + ["W_PT"], wn)
        _write_table(out / f"{tag}_negative_control.csv",
                     ["t", "deviation_from_exponential", "oracle_residual"], neg)
        _, _, ctrl = _demo_operator_rows(pole, [1.0 / pole.gamma])
        ctrl_dev = ctrl[0][1]
        prop_max = max(max(r[1:]) for r in prop)
        wn_max = max(max(r[1:]) for r in wn)
        oracle_max = max(r[2] for r in neg)
        entry = {"pole": pole.to_dict(), "propagator_max_residual": prop_max,
                 "exponential_law_max_residual": wn_max,
                 "negative_control_at_lifetime": ctrl_dev,
                 "negative_control_oracle_max_residual": oracle_max}
        summary["poles"].append(entry)
        print(f"{tag}: order={pole.order} propagator max residual={prop_max:.3e} "
              f"W^(n) max residual={wn_max:.3e} negative control={ctrl_dev:.3f}")
        if not prop_max <= tol:
            failures.append(f"{tag}: closed-form propagator residual {prop_max:.3g} > {tol:g}")
        if not wn_max <= tol:
            failures.append(f"{tag}: exponential-law residual {wn_max:.3g} > {tol:g}")
        if not oracle_max <= tol:
            failures.append(f"{tag}: negative-control oracle residual {oracle_max:.3g} > {tol:g}")
        if not ctrl_dev >= NEGATIVE_CONTROL_MIN:
            failures.append(f"{tag}: negative control {ctrl_dev:.3g} < {NEGATIVE_CONTROL_MIN}")
    write_json(summary, out / "jordan_demo.json")
    if failures:
        raise ContractFailure("; ".join(failures))
    return EXIT_OK


def cmd_compare_unitary(cfg: RunConfig) -> int:
    model = cfg.model()
    if not model.poles:
        raise UsageError("compare-unitary needs a model with at least one pole")
    pole = model.poles[_pole_index(cfg, model)]
    tol = cfg.tol("compare-unitary")
    mode = cfg.get("mode", "semigroup")
    if mode not in ("semigroup", "unitary"):
        raise UsageError(f"--mode must be semigroup or unitary, got {mode!r}")
    grid = cfg.grid({"e0": 0.0, "e_max": pole.e_r + 90 * pole.gamma, "n": 8192})
    times = cfg.times((0.0, 30.0 / pole.gamma, 301))
    if mode == "semigroup":
        require_causal(times)
    h = grid.spacing
    if pole.gamma < 5 * h:
        raise ContractFailure(
            f"grid too coarse for the pole: Gamma = {pole.gamma:g} < 5 * spacing = {5 * h:g}; "
            "increase n or narrow the grid"
        )
    phi = breit_wigner_wavefunction(pole, grid)
    window = gamow_fit_window(pole.gamma)
    hil = hilbert_survival_curve(phi, times, fit_window=window, allow_negative=(mode == "unitary"))
    causal = times >= 0
    tc = times[causal]
    W = build_W_G(pole)
    H = assemble_hamiltonian(W.basis)
    w0 = W.block_trace().real
    expo = np.array([evolve_state_operator(W, H, t).block_trace().real / w0 for t in tc])
    hv = hil.values[causal]
    ratio = hv / np.where(expo > 0, expo, np.nan)
    short = tc <= 5.0 / pole.gamma
    dev = np.abs(ratio - 1.0)
    max_short = float(np.nanmax(dev[short])) if np.any(short) else 0.0
    beyond = np.nonzero(dev > tol)[0]
    crossover = float(tc[beyond[0]]) if len(beyond) else None
    g_fit, _, _, _ = fit_decay_rate(tc, expo, window)
    summary = {
        "pole": pole.to_dict(),
        "grid": grid.to_dict(),
        "mode": mode,
        "tolerances": {"short_time_agreement": tol, "golden_rtol": GOLDEN_RTOL},
        "hilbert_gamma_fit": hil.gamma_fit,
        "exponential_gamma_fit": g_fit,
        "max_relative_deviation_short_time": max_short,
        "crossover_time": crossover,
        "excess_ratio_last": float(ratio[-1]) if len(ratio) else None,
        "t_last": float(tc[-1]) if len(tc) else None,
    }
    out = cfg.out
    write_curve(hil.times, hil.values, out / "hilbert.csv", hil.sidecar())
    write_curve(tc, expo, out / "exponential.csv", {"gamma_fit": g_fit, "window": list(window)})
    write_json(summary, out / "compare.json")
    print(f"short-time max deviation = {max_short:.6g}; crossover t = {crossover}; "
          f"excess ratio at t = {summary['t_last']}: {summary['excess_ratio_last']:.6g}")
    problems = check_golden(cfg, hil.times, hil.values)
    if not max_short <= tol:
        problems.append(f"short-time deviation {max_short:.3g} exceeds {tol:g}")
    if problems:
        raise ContractFailure("; ".join(problems))
    return EXIT_OK


def _operator_from_name(name: str, pole) -> StateOperator:
    if name == "W_PT":
        return build_W_PT(pole)
    if name == "W_G":
        return build_W_G(pole)
    try:
        if name.startswith("W_n:"):
            return build_W_n(pole, int(name[4:]))
        if name.startswith("dyad:"):
            k, l = (int(x) for x in name[5:].split(","))
            m = np.zeros((pole.order, pole.order), dtype=complex)
            m[k, l] = 1.0
            return StateOperator(CompositeBasis((pole,)), m)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad operator {name!r}: {exc}") from None
    raise UsageError(f"unknown operator {name!r} (W_PT, W_G, W_n:<n>, dyad:<k>,<l>)")


def cmd_evolve(cfg: RunConfig) -> int:
    model = cfg.model()
    if not model.poles:
        raise UsageError("evolve needs a model with at least one pole")
    pole = model.poles[_pole_index(cfg, model)]
    tol = cfg.tol("evolve")
    times = cfg.times((0.0, 10.0 / pole.gamma, 21))
    require_causal(times)
    W = _operator_from_name(cfg.get("operator", "W_PT"), pole)
    H = assemble_hamiltonian(W.basis)
    reports = [run_evolution(W, t, H=H, oracle=True) for t in times]
    mats = [r.output.matrix for r in reports]
    write_operator_sweep(times, mats, cfg.out / "evolve.csv")
    worst = max(r.diagnostics["residual"] for r in reports)
    write_json({"operator": cfg.get("operator", "W_PT"), "pole": pole.to_dict(),
                "input_hash": reports[0].input_hash, "max_oracle_residual": worst,
                "underflow": any(r.diagnostics["underflow"] for r in reports),
                "tolerances": {"oracle_residual": tol}}, cfg.out / "evolve.json")
    print(f"max oracle residual = {worst:.3e}")
    problems = check_golden(cfg, times, [np.trace(m).real for m in mats]) if cfg.get("golden") else []
    if not worst <= tol:
        problems.append(f"oracle residual {worst:.3g} > {tol:g}")
    if problems:
        raise ContractFailure("; ".join(problems))
    return EXIT_OK


COMMANDS = {
    "check-hardy": (cmd_check_hardy, "classify wave functions against the Hardy axiom"),
    "decay": (cmd_decay, "Gamow decay curve and lifetime fit"),
    "jordan-demo": (cmd_jordan_demo, "Jordan-block evolution and exponential-law tables"),
    "compare-unitary": (cmd_compare_unitary, "Hilbert-space survival vs exponential law"),
    "evolve": (cmd_evolve, "raw state-operator sweep"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--model", help="S-matrix model JSON")
    common.add_argument("--out", help="output directory (default: gamowkit_out)")
    common.add_argument("--times", help="time sweep t0:t1:n")
    common.add_argument("--tol", type=float, help="override the command's tolerance")
    common.add_argument("--golden", help="golden t,P CSV to compare against")
    common.add_argument("--pole", type=int, help="index of the model pole to use")
    common.add_argument("--operator", help="state operator (decay: gamow|W_PT; evolve: W_PT|W_G|W_n:<n>|dyad:<k>,<l>)")
    common.add_argument("--mode", help="compare-unitary: semigroup (default) or unitary")

    parser = argparse.ArgumentParser(prog="gamowkit", parents=[common],
                                     description="Time-asymmetric resonance toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, argument_default=argparse.SUPPRESS)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "--times -1:5:10" as two options
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--times", "--tol") and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(args)
        return COMMANDS[args.command][0](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, GridError, ShapeError, CausalityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractFailure as exc:
        print(f"contract failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GamowkitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
