"""Configuration, time loop and output files for scenario runs.

A configuration is a nested mapping, stored as YAML:

.. code-block:: yaml

    scenario: marshak          # gaussian | marshak | hohlraum
    scale: desk                # benchmark | desk preset for resolution and t_end
    solver: dlra               # full | dlra | rosseland
    discretization: {nx: null, ny: null, quad_order: null}
    physics: {epsilon: null}
    time: {t_end: null, cfl_safety: 0.95}
    lowrank: {theta_factor: 0.01, rank_initial: 10, rank_max: 100}
    output: {out: null, dump_every: 0, vtk: false}
    run: {assert: null, seed: 0}

``null`` entries fall back to the scenario preset.  The energy check is
strict for problems whose walls inject no energy and monitor-only for the
heated-wall and vacuum problems.
"""
import copy
import csv
import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from .diagnostics import (StepRecord, cfl_bound, check_energy, energy, mass,
                          radiation_temperature)
from .full import StepFailure, initial_full_state, step_full
from .grid import build_diff_ops, build_grid
from .lowrank import TruncationPolicy, dlra_step, initial_lowrank_state
from .model import Discretization
from .quadrature import angular_ops, build_quadrature
from .rosseland import RosselandState, rosseland_step
from .scenarios import builtin_scenario

SOLVERS = ("full", "dlra", "rosseland")
SCENARIOS = ("gaussian", "marshak", "hohlraum")
SCALES = ("benchmark", "desk")
ASSERT_MODES = ("strict", "monitor")

DEFAULTS = {
    "scenario": "gaussian",
    "scale": "desk",
    "solver": "full",
    "discretization": {"nx": None, "ny": None, "quad_order": None},
    "physics": {"epsilon": None},
    "time": {"t_end": None, "cfl_safety": 0.95},
    "lowrank": {"theta_factor": 1e-2, "rank_initial": 10, "rank_max": 100},
    "output": {"out": None, "dump_every": 0, "vtk": False},
    "run": {"assert": None, "seed": 0},
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if k not in base:
            raise ValueError(f"unknown configuration key {k!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ValueError(f"configuration section {k!r} must be a mapping")
            out[k] = _merge(base[k], v)
        else:
            out[k] = v
    return out


def validate_config(cfg):
    """Merge with defaults and check enumerations and ranges."""
    cfg = _merge(DEFAULTS, cfg)
    if cfg["scenario"] not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    if cfg["scale"] not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    if cfg["solver"] not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    if cfg["run"]["assert"] not in ASSERT_MODES + (None,):
        raise ValueError(f"assert mode must be one of {ASSERT_MODES}")
    if cfg["time"]["cfl_safety"] <= 0:
        raise ValueError("cfl_safety must be positive")
    eps = cfg["physics"]["epsilon"]
    if eps is not None and eps < 0:
        raise ValueError("epsilon must be non-negative")
    if cfg["output"]["dump_every"] < 0:
        raise ValueError("dump_every must be non-negative")
    lr = cfg["lowrank"]
    if lr["theta_factor"] < 0 or lr["rank_initial"] < 1 or lr["rank_max"] < 3:
        raise ValueError("invalid low-rank settings")
    return cfg


def parse_config(text):
    return validate_config(yaml.safe_load(text) or {})


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def setup(cfg):
    """Build scenario and discretisation from a validated configuration."""
    scen = builtin_scenario(cfg["scenario"], cfg["scale"])
    d = cfg["discretization"]
    nx = d["nx"] or scen.n_x
    ny = d["ny"] or scen.n_y
    q = d["quad_order"] or scen.quad_order
    eps = scen.eps if cfg["physics"]["epsilon"] is None else cfg["physics"]["epsilon"]
    grid = build_grid(nx, ny, scen.domain)
    quad = build_quadrature(q)
    disc = Discretization(grid, build_diff_ops(grid), quad, angular_ops(quad),
                          scen.params(grid, eps), scen.boundary)
    scen.boundary.check_equilibrium(scen.a, scen.c)
    return scen, disc


def init_state(scenario, disc, solver, rank_initial=10, seed=0):
    """Equilibrium initial data: g = 0, h = 0, T = T_I on K^C."""
    T0 = scenario.T_init(disc.grid.center_points)
    idx, val = disc.dirichlet
    T0[idx] = val
    if solver == "full":
        return initial_full_state(T0, disc)
    if solver == "dlra":
        return initial_lowrank_state(T0, disc, rank=rank_initial, seed=seed)
    if solver == "rosseland":
        return RosselandState(T=T0)
    raise ValueError(f"unknown solver {solver!r}")


@dataclass
class RunResult:
    state: object
    disc: object
    records: list
    manifest: dict
    flags: dict = field(default_factory=dict)


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_timeseries(path, records):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "energy", "mass", "rank", "dt"])
        for r in records:
            wr.writerow([_fmt(r.t), _fmt(r.energy), _fmt(r.mass), r.rank, _fmt(r.dt)])


def _field_table(state, disc):
    pts = disc.grid.center_points
    T = np.asarray(state.T)
    phi = disc.planck(T) + disc.params.eps**2 * getattr(state, "h", 0.0)
    return pts, T, radiation_temperature(state, disc), phi


def _write_dump(path, state, disc):
    pts, T, Trad, phi = _field_table(state, disc)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "y", "T", "T_rad", "phi"])
    for i in range(len(T)):
        wr.writerow([_fmt(pts[i, 0]), _fmt(pts[i, 1]), _fmt(T[i]), _fmt(Trad[i]), _fmt(phi[i])])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_vtk(path, state, disc):
    """Legacy ASCII VTK file with T, T_rad and phi on the cell centers."""
    g = disc.grid
    _, T, Trad, phi = _field_table(state, disc)
    n = g.n_centers
    lines = ["# vtk DataFile Version 3.0", f"step {getattr(state, 'step', 0)}", "ASCII",
             "DATASET STRUCTURED_POINTS", f"DIMENSIONS {g.n_x} {g.n_y} 1",
             f"ORIGIN {g.domain[0]!r} {g.domain[2]!r} 0", f"SPACING {g.dx!r} {g.dy!r} 1",
             f"POINT_DATA {n}"]
    for name, arr in (("T", T), ("T_rad", Trad), ("phi", phi)):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(v)) for v in arr[:n]]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _dump(out, state, disc, vtk):
    """Write the field table (and optionally VTK) for ``state``; return its step."""
    step = getattr(state, "step", 0)
    os.makedirs(os.path.join(out, "fields"), exist_ok=True)
    _write_dump(os.path.join(out, "fields", f"step_{step:06d}.csv"), state, disc)
    if vtk:
        write_vtk(os.path.join(out, "fields", f"step_{step:06d}.vtk"), state, disc)
    return step


def _record(state, disc, dt, cfl, rank, stats=None):
    return StepRecord(t=state.t, energy=energy(state, disc), mass=mass(state, disc), rank=rank,
                      dt=dt, cfl=cfl,
                      newton_iterations=getattr(stats, "iterations", 0),
                      newton_bisected=getattr(stats, "bisected", 0))


def run(cfg, out=None, max_steps=None):
    """Run a configured scenario.

    Parameters
    ----------
    cfg : dict
        Configuration (validated and merged with defaults here).
    out : str, optional
        Output directory; overrides ``cfg['output']['out']``.  Nothing is
        written when both are unset.
    max_steps : int, optional
        Stop after this many steps even if t_end is not reached.

    Returns
    -------
    RunResult
    """
    cfg = validate_config(cfg)
    out = out or cfg["output"]["out"]
    solver = cfg["solver"]
    seed = int(cfg["run"]["seed"])
    scen, disc = setup(cfg)
    mode = cfg["run"]["assert"] or scen.assert_mode
    t_end = scen.t_end if cfg["time"]["t_end"] is None else float(cfg["time"]["t_end"])
    lr = cfg["lowrank"]
    policy = TruncationPolicy(tol=lr["theta_factor"], r_max=int(lr["rank_max"]))
    state = init_state(scen, disc, solver, int(lr["rank_initial"]), seed)

    cfl = cfl_bound(disc.with_eps(0.0) if solver == "rosseland" else disc)
    dt_nominal = cfg["time"]["cfl_safety"] * cfl
    rank_of = (lambda s: s.rank) if solver == "dlra" else (lambda s: 0)
    records = [_record(state, disc, 0.0, cfl, rank_of(state))]
    flags = {"energy_increase_steps": [], "truncation_events": 0, "rank_cap_hits": 0,
             "vacuum_regularized_steps": 0, "newton_bisections": 0}
    e0 = records[0].energy
    dump_every = int(cfg["output"]["dump_every"])
    vtk = bool(cfg["output"]["vtk"])
    last_dump = None
    if out:
        os.makedirs(out, exist_ok=True)
        last_dump = _dump(out, state, disc, vtk)
    status = "completed"
    error = None
    wall0 = time.perf_counter()
    n = 0
    try:
        while t_end - state.t > 1e-12 * max(t_end, 1.0):
            if max_steps is not None and n >= max_steps:
                status = "stopped"
                break
            dt = min(dt_nominal, t_end - state.t)
            if solver == "full":
                new, stats = step_full(state, disc, dt)
            elif solver == "dlra":
                new, info = dlra_step(state, disc, dt, policy, seed=seed)
                stats = info.newton
                flags["truncation_events"] += int(info.truncated)
                flags["rank_cap_hits"] += int(info.cap_hit)
                flags["vacuum_regularized_steps"] += int(info.regularized)
            else:
                new, stats = rosseland_step(state, disc, dt)
            rec = _record(new, disc, dt, cfl, rank_of(new), stats)
            flags["newton_bisections"] += rec.newton_bisected
            if not check_energy(rec.energy, records[-1].energy, e0, mode):
                flags["energy_increase_steps"].append(new.step)
            state = new
            records.append(rec)
            n += 1
            if out and dump_every and state.step % dump_every == 0:
                last_dump = _dump(out, state, disc, vtk)
    except (StepFailure, ArithmeticError, RuntimeError) as exc:
        status = "failed"
        error = f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - wall0

    manifest = {
        "config": cfg,
        "config_hash": config_hash(cfg),
        "scenario": scen.name,
        "solver": solver,
        "units": scen.units,
        "grid": {"nx": disc.grid.n_x, "ny": disc.grid.n_y, "n_I": disc.grid.n_I,
                 "n_C": disc.grid.n_C, "n_dirs": disc.quad.n_dirs},
        "epsilon": disc.params.eps,
        "assert_mode": mode,
        "dt_nominal": dt_nominal,
        "cfl_bound": cfl,
        "steps": n,
        "t_final": state.t,
        "wall_time_s": wall,
        "status": status,
        "error": error,
        "flags": flags,
    }
    if out:
        if last_dump != state.step:
            _dump(out, state, disc, vtk)
        _write_timeseries(os.path.join(out, "timeseries.csv"), records)
        with open(os.path.join(out, "config.yaml"), "w") as fh:
            fh.write(dump_config(cfg))
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    result = RunResult(state=state, disc=disc, records=records, manifest=manifest, flags=flags)
    if status == "failed":
        raise StepFailure(error, {"result": result})
    return result
