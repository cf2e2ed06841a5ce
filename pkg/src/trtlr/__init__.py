"""Macro-micro thermal radiative transfer with full-rank and dynamical
low-rank discrete-ordinates solvers on a staggered grid."""

from .quadrature import Quadrature, AngularOps, build_quadrature, angular_ops
from .grid import StaggeredGrid, DiffOps, build_grid, build_diff_ops
from .model import PhysParams, Discretization, planck, uniform_params, make_discretization
from .boundary import (BoundarySpec, WallSpec, uniform_walls, apply_full_bc, impose_lowrank_bc,
                       boundary_h_consistency, interpolate_h)
from .full import FullState, StepFailure, step_micro, step_macro, step_full, initial_full_state
from .lowrank import (LowRankState, TruncationPolicy, pre_augment, k_step, l_step, s_step,
                      assemble_augmented, conservative_truncate, dlra_step, initial_lowrank_state)
from .rosseland import RosselandState, rosseland_step
from .diagnostics import (StepRecord, energy, mass, cfl_bound, cfl_formula, radiation_temperature,
                          relative_error)
from .scenarios import Scenario, builtin_scenario
from .runner import load_config, run, validate_config

__version__ = "0.1.0"
