"""Config-driven command line front end.

``crmatrix run --config run.json`` executes one named task and writes CSV
files plus a manifest into the output directory; ``crmatrix list-presets``
prints the shipped model presets.  Exit codes: 0 success, 2 config error,
3 numerical guard tripped.  The default output directory can be set with
the CRMATRIX_OUTDIR environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import divergence, gauge, io, presets, transport
from .errors import ConfigError, NumericalGuardError
from .model import (BlochField, LatticeSpec, TwoBandAngles, build_kgrid,
                    eigenfield_from_hamiltonian, two_band_field)
from .rmatrix import berry_connection, position_matrix, reduced_position_matrix

TASKS = ("crm", "connection", "berry-phase", "gauge-audit", "shift-current",
         "pump", "divergence-demo", "incompleteness")

_EXPR_NAMES = {
    "pi": np.pi, "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "sqrt": np.sqrt, "abs": np.abs, "arccos": np.arccos, "arcsin": np.arcsin,
    "arctan": np.arctan, "angle": np.angle, "cosh": np.cosh, "sinh": np.sinh,
    "j": 1j,
}


def _eval_expr(expr: str, **vars):
    """Evaluate a numeric expression string with a restricted namespace."""
    try:
        return eval(expr, {"__builtins__": {}}, {**_EXPR_NAMES, **vars})
    except Exception as exc:
        raise ConfigError(f"cannot evaluate expression {expr!r}: {exc}") from exc


# -- schema ------------------------------------------------------------------

def _check_keys(section: dict, path: str, allowed: dict):
    """Reject unknown keys and missing required keys, naming the dotted path."""
    if not isinstance(section, dict):
        raise ConfigError(f"{path} must be an object")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}")
    for key, required in allowed.items():
        if required and key not in section:
            raise ConfigError(f"missing required key {path}.{key}")


def _positive_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{path} must be a positive integer")
    return value


def _positive_number(value, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"{path} must be a positive number")
    return float(value)


def load_config(path: Path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    _check_keys(cfg, "config", {"lattice": True, "model": True, "task": True,
                                "output": False, "seed": False, "workers": False})
    lat = cfg["lattice"]
    _check_keys(lat, "lattice", {"N": True, "a": True, "n_bands": True, "origin": False})
    _positive_int(lat["N"], "lattice.N")
    _positive_number(lat["a"], "lattice.a")
    _positive_int(lat["n_bands"], "lattice.n_bands")

    model = cfg["model"]
    _check_keys(model, "model", {"preset": False, "params": False,
                                 "angles": False, "hamiltonian": False})
    if sum(k in model for k in ("preset", "angles", "hamiltonian")) != 1:
        raise ConfigError("model needs exactly one of model.preset, model.angles, model.hamiltonian")
    if "angles" in model:
        _check_keys(model["angles"], "model.angles",
                    {"theta": True, "phi": True, "dtheta": False, "dphi": False})
    if "preset" in model and model["preset"] not in presets.PRESETS:
        raise ConfigError(f"model.preset must be one of {sorted(presets.PRESETS)}")

    task = cfg["task"]
    _check_keys(task, "task", {"name": True, "params": False})
    if task["name"] not in TASKS:
        raise ConfigError(f"task.name must be one of {TASKS}")
    if "output" in cfg:
        _check_keys(cfg["output"], "output", {"directory": True})
    if "seed" in cfg and (not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool)):
        raise ConfigError("seed must be an integer")
    return cfg


def _lattice(cfg: dict) -> LatticeSpec:
    lat = cfg["lattice"]
    return LatticeSpec(n_cells=lat["N"], lattice_constant=float(lat["a"]),
                       n_bands=lat["n_bands"], origin=float(lat.get("origin", 0.0)))


def build_model_field(cfg: dict, spec: LatticeSpec) -> BlochField:
    model = cfg["model"]
    grid = build_kgrid(spec)
    if "angles" in model:
        ang = model["angles"]
        a = spec.lattice_constant

        def mk(expr):
            return lambda k: np.broadcast_to(_eval_expr(expr, k=k, a=a), np.shape(k)).astype(float)

        angles = TwoBandAngles(
            theta=mk(ang["theta"]), phi=mk(ang["phi"]),
            dtheta=mk(ang["dtheta"]) if "dtheta" in ang else None,
            dphi=mk(ang["dphi"]) if "dphi" in ang else None)
        return two_band_field(angles, grid, name="angles")
    if "hamiltonian" in model:
        table = model["hamiltonian"]
        nb = spec.n_bands
        if (not isinstance(table, list) or len(table) != nb
                or any(len(row) != nb for row in table)):
            raise ConfigError(f"model.hamiltonian must be a {nb}x{nb} matrix of expressions")

        def h(k):
            return np.array([[complex(_eval_expr(e, k=k, a=spec.lattice_constant))
                              for e in row] for row in table])

        return eigenfield_from_hamiltonian(h, grid, name="hamiltonian")

    name = model["preset"]
    params = model.get("params", {})
    if name == "identity":
        return presets.identity_field(spec)
    if name == "two-band-generic":
        return presets.generic_two_band(spec, **params)
    if name == "graphene-ribbon":
        return presets.graphene_loop(spec, **params)
    raise ConfigError(f"preset {name!r} does not define a 1D coefficient field; "
                      "use it with its dedicated task")


# -- tasks -------------------------------------------------------------------

def _task_crm(field, params, outdir, seed, workers):
    pm = position_matrix(field)
    rows = io.write_csv(outdir / "crm.csv", ("m", "p", "n", "q", "re", "im"),
                        io.position_matrix_rows(pm))
    print(f"hermiticity check: pass (defect {pm.hermiticity_defect:.3e})")
    return [("crm.csv", rows)], {"crm_hermiticity": 1e-10}


def _task_connection(field, params, outdir, seed, workers):
    conn = berry_connection(field)
    red = reduced_position_matrix(field)
    r1 = io.write_csv(outdir / "connection.csv", ("p", "m", "n", "re", "im"),
                      io.connection_rows(conn))
    r2 = io.write_csv(outdir / "reduced_r.csv", ("p", "m", "n", "re", "im"),
                      io.connection_rows(red))
    return [("connection.csv", r1), ("reduced_r.csv", r2)], {"hermiticity": 1e-10}


def _task_berry_phase(field, params, outdir, seed, workers):
    bands = params.get("bands", [params.get("band", 0)])
    rows = [(b, io.fmt(gauge.berry_phase(field, b))) for b in bands]
    n = io.write_csv(outdir / "berry_phase.csv", ("band", "theta"), rows)
    return [("berry_phase.csv", n)], {"zero_overlap": 1e-12}


def _task_gauge_audit(field, params, outdir, seed, workers):
    n_seeds = params.get("seeds", 20)
    modes = params.get("modes", 3)
    scale = params.get("scale", 0.2)
    band = params.get("band", 0)
    kindex = params.get("kindex", 0)
    conn = berry_connection(field)
    grid = field.grid

    def audit_one(s):
        gauge_seed = seed + s
        diag = gauge.random_gauge_field(field.n_bands, grid, modes, gauge_seed,
                                        scale=scale, diagonal=True)
        full = gauge.random_gauge_field(field.n_bands, grid, modes, gauge_seed + 10_000,
                                        scale=scale, diagonal=False)
        m_diag = gauge.gauge_transform(conn.values, diag)
        m_full = gauge.gauge_transform(conn.values, full)
        return [
            gauge.InvarianceReport(
                "diagonal_value", band, gauge_seed,
                gauge.diagonal_value(conn.values, band, kindex),
                gauge.diagonal_value(m_diag, band, kindex), 1e-12),
            gauge.InvarianceReport(
                "diagonal_loop", band, gauge_seed,
                gauge.diagonal_loop(conn.values, band, grid),
                gauge.diagonal_loop(m_diag, band, grid), 1e-9),
            gauge.InvarianceReport(
                "trace_loop", band, gauge_seed,
                gauge.trace_loop(conn.values, grid),
                gauge.trace_loop(m_full, grid), 10.0 / grid.n ** 2),
            gauge.InvarianceReport(
                "berry_phase", band, gauge_seed,
                gauge.berry_phase(field, band),
                gauge.berry_phase(gauge.apply_gauge_to_field(field, diag), band), 1e-9),
        ]

    reports = [r for chunk in io.ordered_map(audit_one, range(n_seeds), workers)
               for r in chunk]
    n = io.write_csv(outdir / "gauge_audit.csv",
                     ("name", "band", "seed", "before_re", "before_im",
                      "after_re", "after_im", "delta", "invariant"),
                     io.report_rows(reports))
    return [("gauge_audit.csv", n)], {"diagonal_loop": 1e-9, "berry_phase": 1e-9,
                                      "trace_loop": 10.0 / grid.n ** 2}


def _frequencies(params):
    freq = params.get("frequencies", {"start": 0.5, "stop": 4.0, "count": 176})
    if isinstance(freq, dict):
        _check_keys(freq, "task.params.frequencies",
                    {"start": True, "stop": True, "count": True})
        return np.linspace(freq["start"], freq["stop"], freq["count"])
    return np.asarray(freq, dtype=float)


def _task_shift_current(field, params, outdir, seed, workers):
    if field.energies is None:
        raise ConfigError("task shift-current needs a model with band energies")
    fillings = params.get("fillings")
    if fillings is None:
        # fill the energetically lower band(s) at half filling of the set
        order = np.argsort(field.energies[0])
        fillings = np.zeros(field.n_bands)
        fillings[order[: field.n_bands // 2]] = 1.0
    occ = transport.OccupationSpec(np.asarray(fillings, dtype=float))
    drive = transport.DriveSpec(frequencies=_frequencies(params),
                                amplitude=params.get("amplitude", 1.0),
                                broadening=params.get("eta", 0.02))
    result = transport.shift_current_spectrum(field, occ, drive)
    n = io.write_csv(outdir / "spectrum.csv", ("omega", "J_s", "skipped_fraction"),
                     io.spectrum_rows(result))
    print(f"skipped shift-undefined fraction: {result.skipped_fraction:.4f}")
    return [("spectrum.csv", n)], {"shift_modulus": transport.SHIFT_MODULUS_TOL}


def _task_pump(cfg, spec, params, outdir, seed, workers):
    name = cfg["model"].get("preset")
    if name != "qwz-pump":
        raise ConfigError("task pump requires model.preset = qwz-pump")
    mu = cfg["model"].get("params", {}).get("mu", -1.0)
    n_lambda = params.get("n_lambda", spec.n_cells)
    band = params.get("band", 0)
    family = presets.qwz_pump(spec, n_lambda, mu=mu)
    pump = transport.pumped_charge(family, band)
    oracle = transport.chern_number(family, band)
    r1 = io.write_csv(outdir / "pump.csv", ("lambda", "P", "Q_cumulative"),
                      io.pump_rows(pump))
    r2 = io.write_csv(outdir / "oracle.csv", ("preset", "band", "chern", "residue"),
                      [("qwz-pump", band, oracle.value, io.fmt(oracle.residue))])
    print(f"pumped charge {pump.delta_q:+.6f}, plaquette invariant {oracle.value:+d}")
    return [("pump.csv", r1), ("oracle.csv", r2)], {"chern_residue": 0.05}


def _task_divergence(cfg, spec, params, outdir, seed, workers):
    windows = params.get("windows", [8, 16, 32, 64, 128, 256])
    centering = params.get("centering", divergence.FROM_ORIGIN)
    samples = params.get("samples", divergence.DEFAULT_SAMPLES)
    a = spec.lattice_constant
    cell = divergence.SampledCellFunction.from_callable(
        lambda r: np.sin(2.0 * np.pi * r / a) ** 2, a, samples).normalized()
    study = divergence.truncated_position_expectation(cell, 0.0, windows, centering)
    audit = divergence.translation_audit(cell, 0.0, params.get("window", 32), centering)
    r1 = io.write_csv(outdir / "truncation.csv", ("W", "value"), io.truncation_rows(study))
    r2 = io.write_csv(outdir / "translation.csv", ("before", "after", "predicted_shift"),
                      [(io.fmt(audit.before), io.fmt(audit.after), io.fmt(audit.predicted_shift))])
    print(f"truncation slope {study.slope:.6f} (R^2 {study.r_squared:.6f}); "
          f"translation shift {audit.measured_shift:+.6f}")
    return [("truncation.csv", r1), ("translation.csv", r2)], {"fit_r2": 0.999}


def _task_incompleteness(cfg, spec, params, outdir, seed, workers):
    n_max_list = params.get("n_max_list", [1, 2, 4, 8, 16, 32, 64])
    samples = params.get("samples", divergence.DEFAULT_SAMPLES)
    a = spec.lattice_constant
    target = divergence.SampledCellFunction.from_callable(
        lambda r: np.where(r > a / 2.0, 1.0, 0.0), a, samples).normalized()
    pairs = [(nm, divergence.projection_residual(target, nm)) for nm in n_max_list]
    r1 = io.write_csv(outdir / "residual.csv", ("n_max", "residual"),
                      io.residual_rows(pairs))
    ortho = params.get("orthogonality", {"n_max": 2, "N": 4})
    _check_keys(ortho, "task.params.orthogonality", {"n_max": True, "N": True})
    _, worst = divergence.gapped_basis_gram(ortho["n_max"], ortho["N"], a, samples)
    r2 = io.write_csv(outdir / "orthogonality.csv", ("n_max", "N", "worst_off_diagonal"),
                      [(ortho["n_max"], ortho["N"], io.fmt(worst))])
    print(f"gap-supported residuals all {pairs[-1][1]:.12f}; worst Gram off-diagonal {worst:.3e}")
    return [("residual.csv", r1), ("orthogonality.csv", r2)], {"gram_off_diag": 1e-10}


def run(cfg: dict, outdir_override=None, seed_override=None, workers: int = 1,
        verbose: bool = False) -> int:
    spec = _lattice(cfg)
    seed = seed_override if seed_override is not None else cfg.get("seed", 0)
    default_dir = os.environ.get("CRMATRIX_OUTDIR", "crmatrix-out")
    outdir = Path(outdir_override or cfg.get("output", {}).get("directory", default_dir))
    outdir.mkdir(parents=True, exist_ok=True)
    task = cfg["task"]["name"]
    params = cfg["task"].get("params", {})

    if task == "pump":
        files, tolerances = _task_pump(cfg, spec, params, outdir, seed, workers)
    elif task == "divergence-demo":
        files, tolerances = _task_divergence(cfg, spec, params, outdir, seed, workers)
    elif task == "incompleteness":
        files, tolerances = _task_incompleteness(cfg, spec, params, outdir, seed, workers)
    else:
        field = build_model_field(cfg, spec)
        handler = {"crm": _task_crm, "connection": _task_connection,
                   "berry-phase": _task_berry_phase, "gauge-audit": _task_gauge_audit,
                   "shift-current": _task_shift_current}[task]
        files, tolerances = handler(field, params, outdir, seed, workers)

    io.write_manifest(outdir, task, cfg, seed,
                      grids={"N": spec.n_cells, "a": spec.lattice_constant,
                             "n_bands": spec.n_bands},
                      tolerances=tolerances, files=files)
    if verbose:
        for name, rows in files:
            print(f"wrote {outdir / name} ({rows} rows)")
    print(f"wrote {outdir / 'manifest.json'}")
    return 0


def list_presets() -> str:
    lines = [f"{name:18s} {desc}" for name, desc in presets.PRESETS.items()]
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="crmatrix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a task described by a JSON config")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--outdir", default=None, help="output directory override")
    p_run.add_argument("--seed", type=int, default=None, help="seed override")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list-presets", help="print the shipped model presets")

    args = parser.parse_args(argv)
    if args.command == "list-presets":
        print(list_presets())
        return 0
    try:
        cfg = load_config(args.config)
        return run(cfg, outdir_override=args.outdir, seed_override=args.seed,
                   workers=args.workers, verbose=args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
