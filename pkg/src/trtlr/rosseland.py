"""Explicit staggered 5-point scheme for the Rosseland diffusion equation.

    c_nu (T^{n+1} - T^n) / dt + 2 pi / (c dt) (B^{n+1} - B^n)
        = 2 pi / 3 * sum_v D0_v (sigma_t^{-1} d0_v B^n)

The left side is implicit in T^{n+1} and solved per point with the same
Newton iteration as the macro update; centers and corners are evolved
independently.
"""
from dataclasses import dataclass, replace

import numpy as np

from .full import solve_temperature


@dataclass
class RosselandState:
    T: np.ndarray
    t: float = 0.0
    step: int = 0


def rosseland_rhs(T, disc):
    """Diffusion term 2 pi / 3 * sum_v D0_v (d0_v B / sigma_t)."""
    p, ops = disc.params, disc.ops
    if np.any(p.sigma_t_I <= 0):
        raise ValueError("Rosseland diffusion needs sigma_t > 0 on every interface")
    B = disc.planck(T)
    total = (ops.D0["x"] @ (disc.gradient(B, "x") / p.sigma_t_I)
             + ops.D0["y"] @ (disc.gradient(B, "y") / p.sigma_t_I))
    return 2.0 * np.pi / 3.0 * total


def rosseland_step(state, disc, dt):
    """Advance the reference solution by one step of length ``dt``."""
    p = disc.params
    T = state.T
    alpha = p.cv_C / dt
    beta = 2.0 * np.pi / (p.c * dt) * p.a * p.c / (2.0 * np.pi)
    rhs = alpha * T + beta * T**4 + rosseland_rhs(T, disc)
    T_new, stats = solve_temperature(alpha, beta, rhs, T)
    idx, val = disc.dirichlet
    T_new[idx] = val
    return replace(state, T=T_new, t=state.t + dt, step=state.step + 1), stats


def rosseland_cfl(disc):
    """Parabolic part of the stability bound (eps = 0)."""
    from .diagnostics import cfl_bound
    return cfl_bound(disc.with_eps(0.0))
