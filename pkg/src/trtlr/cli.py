"""Command line entry point: ``trtlr --scenario marshak --solver dlra --out run/``."""
import argparse
import sys

import yaml

from .full import StepFailure
from .runner import ASSERT_MODES, SCALES, SCENARIOS, SOLVERS, load_config, run, validate_config


def build_parser():
    p = argparse.ArgumentParser(prog="trtlr", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML configuration file; flags override its entries")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--scale", choices=SCALES)
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--quad-order", type=int)
    p.add_argument("--t-end", type=float)
    p.add_argument("--cfl-safety", type=float)
    p.add_argument("--theta-factor", type=float)
    p.add_argument("--rank-initial", type=int)
    p.add_argument("--rank-max", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--dump-every", type=int)
    p.add_argument("--vtk", action="store_true", default=None, help="also write VTK dumps")
    p.add_argument("--assert", dest="assert_mode", choices=ASSERT_MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-steps", type=int, help="stop early after this many steps")
    return p


# flag name -> (section, key); None section means top level
_FLAGS = {
    "scenario": (None, "scenario"),
    "scale": (None, "scale"),
    "solver": (None, "solver"),
    "epsilon": ("physics", "epsilon"),
    "nx": ("discretization", "nx"),
    "ny": ("discretization", "ny"),
    "quad_order": ("discretization", "quad_order"),
    "t_end": ("time", "t_end"),
    "cfl_safety": ("time", "cfl_safety"),
    "theta_factor": ("lowrank", "theta_factor"),
    "rank_initial": ("lowrank", "rank_initial"),
    "rank_max": ("lowrank", "rank_max"),
    "out": ("output", "out"),
    "dump_every": ("output", "dump_every"),
    "vtk": ("output", "vtk"),
    "assert_mode": ("run", "assert"),
    "seed": ("run", "seed"),
}


def config_from_args(args):
    cfg = load_config(args.config) if args.config else validate_config({})
    for name, (section, key) in _FLAGS.items():
        value = getattr(args, name)
        if value is None:
            continue
        if section is None:
            cfg[key] = value
        else:
            cfg[section][key] = value
    return validate_config(cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, OSError, yaml.YAMLError) as exc:
        print(f"trtlr: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run(cfg, max_steps=args.max_steps)
    except StepFailure as exc:
        print(f"trtlr: run failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"trtlr: configuration error: {exc}", file=sys.stderr)
        return 2
    m = result.manifest
    last = result.records[-1]
    print(f"{m['scenario']} {m['solver']}: {m['status']} after {m['steps']} steps, "
          f"t = {m['t_final']:.6g}, energy = {last.energy:.6g}, rank = {last.rank}, "
          f"wall time {m['wall_time_s']:.2f} s")
    return 0
