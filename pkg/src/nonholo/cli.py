"""Command-line front end: build systems from a config file and run experiments.

    nonholo <subcommand> --config cfg.ini [--out DIR] [--seed N] [--threads N]

Subcommands: simulate, ensemble, fokker-planck, compare-fp-mc, invariants,
order-study.  Exit codes: 0 success, 1 usage/config error, 2 numerical
failure (a machine-readable error report is written to report.json).

Artifacts (CSV by default, JSON with output.format = json):
    trajectory.csv   t, state columns, invariant columns
    stats.csv        t, <name>_mean/_var/_min/_max per functional
    density.csv      cell centers + density (plus compact density.npy)
    invariants.csv   one row per stored time
    report.json      schema-versioned run summary

Floats are serialized at round-trip precision (%.17g).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import algebra, chart, ensemble as ens, fokker_planck as fpk, rolling, sde, suslov
from .config import ExperimentConfig, ParseError, ValidationError, load_config, serialize

SCHEMA_VERSION = 1

NUMERICAL_ERRORS = (
    suslov.NoiseSingular, suslov.ConstraintViolated, chart.HessianSingular,
    chart.ChartDomain, rolling.EffectiveMassSingular, fpk.CFLViolation,
    fpk.CoverageLow, fpk.UnsupportedDependence, ens.EmptyEnsemble,
    sde.InvalidStep, algebra.SingularInertia, np.linalg.LinAlgError,
)


@dataclass
class BuiltSystem:
    kind: str
    field: sde.StratonovichField
    x0: np.ndarray
    columns: List[str]
    invariants: Dict[str, Callable]
    params: object
    extra_columns: Optional[Callable] = None   # states -> (name -> column)


def _inertia_from(cfg: ExperimentConfig) -> algebra.InertiaTensor:
    vals = cfg.system["inertia"]
    if len(vals) == 3:
        return algebra.InertiaTensor.diagonal(*vals)
    return algebra.InertiaTensor(np.array(vals, dtype=float).reshape(3, 3))


def _potential_from(cfg: ExperimentConfig):
    kind = cfg.system["potential"]
    if kind == "zero":
        return suslov.ZeroPotential()
    if kind == "linear":
        return suslov.LinearPotential(np.array(cfg.system["chi"], dtype=float))
    return suslov.QuadraticCTPotential(float(cfg.system["epsilon"]))


def _suslov_noise_from(cfg: ExperimentConfig, params: suslov.SuslovParams):
    sec = cfg.noise
    kind = sec["kind"]
    if kind == "constant":
        return suslov.ConstantNoise()
    if kind == "ou":
        return suslov.OrnsteinUhlenbeck(float(sec["theta"]), float(sec["sigma0"]))
    cross_kind = kind.split("_", 1)[1]
    chi = np.array(cfg.system["chi"], dtype=float) if cross_kind == "chi" else None
    return suslov.cross_noise(cross_kind, np.array(sec["g"], dtype=float),
                              np.array(sec["eta"], dtype=float), chi=chi,
                              corotate=bool(sec["corotate"]))


def _unit(vec):
    vec = np.asarray(vec, dtype=float)
    norm = float(np.sqrt(vec @ vec))
    if norm == 0.0:
        raise ValidationError("initial.gamma", "cannot normalize a zero vector")
    return vec / norm


def _suslov_invariants(params, kind):
    keys = ["energy", "gamma_norm", "constraint", "lagrange"]
    if isinstance(params.potential, suslov.ZeroPotential):
        keys.append("momentum_sq")
    if isinstance(params.potential, suslov.LinearPotential):
        keys.append("kharlamova")
    if isinstance(params.potential, suslov.QuadraticCTPotential):
        keys.append("clebsch_tisserand")
    return {k: suslov.make_functional(params, k, kind) for k in keys}


def build_system(cfg: ExperimentConfig) -> BuiltSystem:
    kind = cfg.system["kind"]
    gamma = _unit(cfg.initial["gamma"])
    omega = np.array(cfg.initial["omega"], dtype=float)

    if kind.startswith("suslov"):
        params = suslov.SuslovParams(
            _inertia_from(cfg), np.array(cfg.system["axis"], dtype=float),
            _potential_from(cfg),
        )
        if kind == "suslov_det":
            if abs(float(params.axis @ omega)) > 1e-9:
                raise ValidationError("initial.omega", "a . Omega must vanish for suslov_det")
            x0 = suslov.state_det(params, omega, gamma)
            return BuiltSystem(kind, suslov.det_field(params), x0,
                               ["om1", "om2", "om3", "ga1", "ga2", "ga3"],
                               _suslov_invariants(params, "det"), params)
        noise = _suslov_noise_from(cfg, params)
        if kind == "suslov_type1":
            if cfg.noise["kind"].startswith("cross"):
                raise ValidationError("noise.kind", "cross noises are type II constructions")
            n0 = cfg.initial["n"]
            x0 = suslov.state_type1(params, omega, gamma,
                                    None if n0 is None else float(n0))
            return BuiltSystem(kind, suslov.type1_field(params, noise), x0,
                               ["om1", "om2", "om3", "ga1", "ga2", "ga3", "n"],
                               _suslov_invariants(params, "type1"), params)
        # suslov_type2
        nvec = cfg.initial["nvec"]
        if nvec is None:
            nvec = np.cross(omega, gamma)
            if float(nvec @ nvec) == 0.0:
                raise ValidationError("initial.nvec", "default N = Omega x Gamma degenerates; set nvec")
            nvec = _unit(nvec)
        else:
            nvec = np.array(nvec, dtype=float)
        x0 = suslov.state_type2(params, omega, gamma, nvec)
        field = suslov.type2_field(params, noise, eps_n=suslov.noise_floor(nvec))
        return BuiltSystem(kind, field, x0,
                           ["om1", "om2", "om3", "ga1", "ga2", "ga3", "n1", "n2", "n3"],
                           _suslov_invariants(params, "type2"), params)

    if kind.startswith("rolling"):
        radius = float(cfg.system["radius"])
        alpha_kind = cfg.system["alpha"]
        potential = _potential_from(cfg)
        inertia = _inertia_from(cfg)
        pot_value = lambda g: float(potential.value(g, inertia))
        pot_grad = lambda g: np.asarray(potential.grad(g, inertia), dtype=float)
        if cfg.noise["kind"].startswith("cross"):
            raise ValidationError("noise.kind", "cross noises apply to suslov_type2 only")
        theta, sigma0 = float(cfg.noise["theta"]), float(cfg.noise["sigma0"])
        constant = cfg.noise["kind"] == "constant"

        if kind == "rolling_type1":
            params = rolling.RollingParams(
                inertia, float(cfg.system["mass"]),
                alpha=(rolling.constant_alpha(radius) if alpha_kind == "constant"
                       else rolling.skew_alpha(radius)),
                potential_value=pot_value, potential_grad=pot_grad)
            if constant:
                noise_f = lambda o, y, g, n: np.zeros(3)
                noise_s = lambda o, y, g, n: np.zeros(3)
            else:
                noise_f = lambda o, y, g, n: -theta * n
                noise_s = lambda o, y, g, n: np.full(3, sigma0)
            nvec = cfg.initial["nvec"]
            n0 = np.zeros(3) if nvec is None else np.array(nvec, dtype=float)
            x0 = rolling.state_type1(params, omega, gamma, n0)
            inv = {
                "energy": lambda states: _rolling_energy(params, states, type2=False),
                "gamma_norm": lambda states: algebra.dot(states[..., 3:6], states[..., 3:6]),
            }
            return BuiltSystem(kind, rolling.type1_field(params, noise_f, noise_s), x0,
                               ["om1", "om2", "om3", "ga1", "ga2", "ga3", "n1", "n2", "n3"],
                               inv, params,
                               extra_columns=lambda states: _y_columns(params, states, False))

        # rolling_type2: alpha~(Gamma, nu) with a scalar parameter nu shifting the radius
        if alpha_kind == "constant":
            alpha_tilde = lambda g, nu: (radius + float(nu[0])) * np.eye(3)
        else:
            alpha_tilde = lambda g, nu: (radius + float(nu[0])) * algebra.hat(g)
        params = rolling.RollingParams(
            inertia, float(cfg.system["mass"]), alpha_tilde=alpha_tilde,
            potential_value=pot_value, potential_grad=pot_grad)
        if constant:
            noise_f = lambda o, y, g, nu: np.zeros(1)
            noise_s = lambda o, y, g, nu: np.zeros(1)
        else:
            noise_f = lambda o, y, g, nu: -theta * nu
            noise_s = lambda o, y, g, nu: np.full(1, sigma0)
        nu0 = np.array(cfg.initial["nu"], dtype=float)
        x0 = rolling.state_type2(params, omega, gamma, nu0)
        inv = {
            "energy": lambda states: _rolling_energy(params, states, type2=True),
            "gamma_norm": lambda states: algebra.dot(states[..., 3:6], states[..., 3:6]),
        }
        cols = ["om1", "om2", "om3", "ga1", "ga2", "ga3"] + \
               ["nu%d" % (j + 1) for j in range(len(nu0))]
        return BuiltSystem(kind, rolling.type2_field(params, noise_f, noise_s, len(nu0)),
                           x0, cols, inv, params,
                           extra_columns=lambda states: _y_columns(params, states, True))

    # chart systems: the built-in nonholonomic particle
    theta, sigma0 = float(cfg.noise["theta"]), float(cfg.noise["sigma0"])
    if cfg.noise["kind"] == "constant":
        noise_f = lambda r, s, u, w, n: np.zeros(1)
        noise_s = lambda r, s, u, w, n: np.zeros(1)
    elif cfg.noise["kind"] == "ou":
        noise_f = lambda r, s, u, w, n: -theta * n
        noise_s = lambda r, s, u, w, n: np.full(1, sigma0)
    else:
        raise ValidationError("noise.kind", "chart systems support constant or ou noise")
    system = chart.free_particle_system(noise_f, noise_s)
    r0 = np.array(cfg.initial["r"], dtype=float)
    s0 = np.array(cfg.initial["s"], dtype=float)
    u0 = np.array(cfg.initial["u"], dtype=float)
    n0 = np.array(cfg.initial["chart_n"], dtype=float)
    x0 = np.concatenate([r0, s0, u0, n0])
    type2 = kind == "chart_type2"
    field = chart.type2_field(system) if type2 else chart.type1_field(system)
    if x0.shape != (field.dim,):
        raise ValidationError("initial.r", "chart state has dimension %d" % field.dim)
    inv = {
        "energy": lambda states: np.array(
            [chart.chart_energy(system, row, type2) for row in np.atleast_2d(states)]),
        "constraint": lambda states: np.atleast_1d(
            chart.constraint_residual(system, states, type2)),
    }
    cols = ["r1", "r2", "s1", "u1", "u2", "n1"]
    return BuiltSystem(kind, field, x0, cols, inv, system)


def _rolling_energy(params, states, type2):
    states = np.atleast_2d(np.asarray(states, dtype=float))
    y = (rolling.reconstruct_y_type2(params, states) if type2
         else rolling.reconstruct_y_type1(params, states))
    omega = states[..., 0:3]
    u = np.array([params.potential_value(g) for g in states[..., 3:6].reshape(-1, 3)])
    return (0.5 * algebra.dot(params.inertia.apply(omega), omega)
            + 0.5 * params.mass * algebra.dot(y, y) + u.reshape(states.shape[:-1]))


def _y_columns(params, states, type2):
    y = (rolling.reconstruct_y_type2(params, states) if type2
         else rolling.reconstruct_y_type1(params, states))
    return {"y1": y[..., 0], "y2": y[..., 1], "y3": y[..., 2]}


# ----------------------------------------------------------------- writers --

def _fmt(x) -> str:
    return "%.17g" % float(x)


def write_table(path: str, columns: List[str], rows: np.ndarray, fmt: str):
    if fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "columns": list(columns),
            "data": [[float(v) for v in row] for row in rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_table(path: str):
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return payload["columns"], np.array(payload["data"], dtype=float)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [line.strip().split(",") for line in fh if line.strip()]
    return header, np.array(data, dtype=float)


def write_report(out_dir: str, payload: dict):
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=float)


def _selected_invariants(built: BuiltSystem, cfg: ExperimentConfig):
    fields = cfg.output["fields"]
    if not fields:
        return dict(built.invariants)
    unknown = [f for f in fields if f not in built.invariants]
    if unknown:
        raise ValidationError("output.fields", "unknown invariants %s (available: %s)"
                              % (unknown, sorted(built.invariants)))
    return {f: built.invariants[f] for f in fields}


def _trajectory_rows(built: BuiltSystem, cfg: ExperimentConfig, traj: sde.Trajectory):
    columns = ["t"] + list(built.columns)
    blocks = [traj.times[:, None], traj.states]
    if built.extra_columns is not None:
        for name, col in built.extra_columns(traj.states).items():
            columns.append(name)
            blocks.append(np.asarray(col, dtype=float)[:, None])
    for name, fn in _selected_invariants(built, cfg).items():
        columns.append(name)
        blocks.append(np.asarray(fn(traj.states), dtype=float)[:, None])
    return columns, np.hstack(blocks)


# -------------------------------------------------------------- subcommands --

def _steps_of(cfg: ExperimentConfig):
    dt = float(cfg.integration["dt"])
    t_final = float(cfg.integration["t_final"])
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError("integration.t_final", "must be an integer multiple of dt")
    return n, dt


def cmd_simulate(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int) -> dict:
    built = build_system(cfg)
    n_steps, dt = _steps_of(cfg)
    stride = int(cfg.integration["stride"])
    if n_steps % stride != 0:
        raise ValidationError("integration.stride", "must divide the step count %d" % n_steps)
    path = sde.wiener_path(seed, n_steps, dt, built.field.channels)
    traj = sde.integrate(built.field, built.x0, path, stride=stride)
    columns, rows = _trajectory_rows(built, cfg, traj)
    fmt = cfg.output["format"]
    name = "trajectory.%s" % fmt
    write_table(os.path.join(out_dir, name), columns, rows, fmt)
    inv = {k: (float(v[0]), float(v[-1]))
           for k, v in ((k, np.asarray(f(traj.states), dtype=float))
                        for k, f in _selected_invariants(built, cfg).items())}
    return {"subcommand": "simulate", "system": built.kind, "seed": seed,
            "dt": dt, "n_steps": n_steps, "stride": stride,
            "artifacts": [name],
            "invariants_first_last": inv}


def cmd_ensemble(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int) -> dict:
    built = build_system(cfg)
    n_steps, dt = _steps_of(cfg)
    sample_every = int(cfg.ensemble["sample_every"])
    if n_steps % sample_every != 0:
        raise ValidationError("ensemble.sample_every", "must divide the step count %d" % n_steps)
    spec = ens.EnsembleSpec(
        field=built.field, x0=built.x0, n_paths=int(cfg.ensemble["n_paths"]),
        n_steps=n_steps, dt=dt, master_seed=seed,
        functionals=_selected_invariants(built, cfg), sample_every=sample_every,
    )
    result = ens.run_ensemble(spec, workers=threads)
    columns = ["t"]
    blocks = [next(iter(result.series.values())).times[:, None]] if result.series else [
        np.arange(n_steps // sample_every + 1)[:, None] * dt * sample_every]
    for name, series in result.series.items():
        for stat in ("mean", "var", "min", "max"):
            columns.append("%s_%s" % (name, stat))
        blocks += [series.mean[:, None], series.variance[:, None],
                   series.min[:, None], series.max[:, None]]
    fmt = cfg.output["format"]
    name = "stats.%s" % fmt
    write_table(os.path.join(out_dir, name), columns, np.hstack(blocks), fmt)
    return {"subcommand": "ensemble", "system": built.kind, "seed": seed,
            "n_paths": result.n_paths, "n_failed": result.n_failed,
            "failed_indices": result.failed_indices[:100],
            "max_deviation": result.max_deviation,
            "artifacts": [name]}


def _reduced_setup(cfg: ExperimentConfig):
    """Reduced (Omega1, Omega2, N) type I Suslov field + grid + start point."""
    if cfg.system["kind"] != "suslov_type1":
        raise ValidationError("system.kind", "fokker-planck requires suslov_type1")
    params = suslov.SuslovParams(_inertia_from(cfg), np.array(cfg.system["axis"], dtype=float),
                                 _potential_from(cfg))
    noise_kind = cfg.noise["kind"]
    if noise_kind == "constant":
        noise = suslov.ConstantNoise()
    elif noise_kind == "ou":
        noise = suslov.OrnsteinUhlenbeck(float(cfg.noise["theta"]), float(cfg.noise["sigma0"]))
    else:
        raise ValidationError("noise.kind", "fokker-planck supports constant or ou noise")
    field = suslov.reduced_type1_field(params, noise)
    bounds = np.asarray(cfg.fp["bounds"], dtype=float)
    bounds = [tuple(bounds)] * 3 if bounds.size == 2 else [tuple(b) for b in bounds.reshape(3, 2)]
    cells = tuple(int(c) for c in cfg.fp["cells"])
    omega = np.array(cfg.initial["omega"], dtype=float)
    n0 = cfg.initial["n"]
    point = (omega[0], omega[1], omega[2] if n0 is None else float(n0))
    grid = fpk.FPGrid.zeros(bounds, cells)
    start = grid.snap_to_center(point)
    return field, bounds, cells, start


def cmd_fokker_planck(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int) -> dict:
    field, bounds, cells, start = _reduced_setup(cfg)
    t_final = float(cfg.integration["t_final"])
    grid = fpk.FPGrid.point_mass(bounds, cells, start)
    gen = fpk.assemble_generator(field, grid)
    dt_fp = float(cfg.fp["dt_fp"]) or None
    out = fpk.fp_solve(grid, gen, t_final, dt_fp)
    mesh = out.center_mesh()
    columns = ["om1", "om2", "n", "density"]
    rows = np.hstack([mesh, out.density.reshape(-1, 1)])
    write_table(os.path.join(out_dir, "density.csv"), columns, rows, "csv")
    np.save(os.path.join(out_dir, "density.npy"), out.density)
    return {"subcommand": "fokker-planck", "seed": seed,
            "start_cell_center": [float(v) for v in start],
            "cells": list(cells), "t_final": t_final,
            "diagnostics": out.diagnostics,
            "artifacts": ["density.csv", "density.npy"]}


def cmd_compare_fp_mc(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int) -> dict:
    field, bounds, cells, start = _reduced_setup(cfg)
    t_final = float(cfg.integration["t_final"])
    dt = float(cfg.integration["dt"])
    n_steps = int(round(t_final / dt))
    n_paths = int(cfg.fp["mc_paths"])

    grid = fpk.FPGrid.point_mass(bounds, cells, start)
    gen = fpk.assemble_generator(field, grid)
    out = fpk.fp_solve(grid, gen, t_final, float(cfg.fp["dt_fp"]) or None)

    # Monte Carlo from the same one-cell initial density: uniform over the cell
    rng = np.random.Generator(np.random.Philox(key=sde.derive_seed(seed, n_paths)))
    x0s = start + (rng.random((n_paths, 3)) - 0.5) * np.array(grid.deltas)
    spec = ens.EnsembleSpec(field=field, x0=x0s, n_paths=n_paths, n_steps=n_steps,
                            dt=dt, master_seed=seed, sample_every=n_steps)
    finals = ens.run_ensemble(spec, workers=threads).final_states
    distance = fpk.mc_histogram_distance(finals, out)
    print("compare-fp-mc: L1 distance = %.6g (cells=%s, paths=%d)"
          % (distance, "x".join(str(c) for c in cells), n_paths))
    return {"subcommand": "compare-fp-mc", "seed": seed, "cells": list(cells),
            "n_paths": n_paths, "t_final": t_final,
            "l1_distance": distance, "diagnostics": out.diagnostics,
            "artifacts": []}


def cmd_invariants(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int,
                   trajectory: Optional[str] = None) -> dict:
    built = build_system(cfg)
    fmt = cfg.output["format"]
    path = trajectory or os.path.join(out_dir, "trajectory.%s" % fmt)
    columns, rows = read_table(path)
    state_idx = [columns.index(c) for c in built.columns]
    states = rows[:, state_idx]
    times = rows[:, columns.index("t")]
    out_cols = ["t"]
    blocks = [times[:, None]]
    for name, fn in built.invariants.items():
        out_cols.append(name)
        blocks.append(np.asarray(fn(states), dtype=float)[:, None])
    name = "invariants.%s" % fmt
    write_table(os.path.join(out_dir, name), out_cols, np.hstack(blocks), fmt)
    return {"subcommand": "invariants", "input": path, "rows": len(times),
            "artifacts": [name]}


def cmd_order_study(cfg: ExperimentConfig, out_dir: str, seed: int, threads: int) -> dict:
    dt_list = (0.02, 0.01, 0.005, 0.0025)
    problems = {
        "deterministic": (sde.reference_deterministic(), 4),
        "additive": (sde.reference_additive(), 64),
        "multiplicative": (sde.reference_multiplicative(), 64),
    }
    slopes = {}
    for name, ((field, exact, x0), n_paths) in problems.items():
        slopes[name] = sde.estimate_strong_order(field, exact, x0, 1.0, dt_list,
                                                 n_paths=n_paths, seed=seed)
        print("order-study: %s slope = %.3f" % (name, slopes[name]))
    return {"subcommand": "order-study", "seed": seed, "dt_list": list(dt_list),
            "slopes": slopes, "artifacts": []}


# --------------------------------------------------------------------- main --

COMMANDS = {
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "fokker-planck": cmd_fokker_planck,
    "compare-fp-mc": cmd_compare_fp_mc,
    "invariants": cmd_invariants,
    "order-study": cmd_order_study,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nonholo",
        description="Nonholonomic systems with stochastic constraints",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory (default: output.directory)")
        p.add_argument("--seed", type=int, default=None, help="override integration.seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for ensembles")
        if name == "invariants":
            p.add_argument("--trajectory", default=None, help="stored trajectory file")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print("nonholo: config file not found: %s" % args.config, file=sys.stderr)
        return 1
    except (ParseError, ValidationError) as err:
        print("nonholo: %s" % err, file=sys.stderr)
        return 1

    out_dir = args.out or cfg.output["directory"]
    os.makedirs(out_dir, exist_ok=True)
    seed = args.seed if args.seed is not None else int(cfg.integration["seed"])

    kwargs = {}
    if args.subcommand == "invariants":
        kwargs["trajectory"] = args.trajectory
    try:
        report = COMMANDS[args.subcommand](cfg, out_dir, seed, max(1, args.threads), **kwargs)
    except (ParseError, ValidationError) as err:
        print("nonholo: %s" % err, file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as err:
        write_report(out_dir, {"error": {"type": type(err).__name__, "message": str(err)}})
        print("nonholo: numerical failure: %s: %s" % (type(err).__name__, err), file=sys.stderr)
        return 2
    report["config"] = {sec: getattr(cfg, sec) for sec in
                        ("system", "noise", "initial", "integration", "ensemble", "fp", "output")}
    report["threads"] = args.threads
    write_report(out_dir, report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
