"""Full-rank macro-micro IMEX scheme.

The particle density is split as f = B(T) + eps g + eps^2 h with <g> = 0.
One step advances g with explicit transport and a pointwise implicit
relaxation, then h and T with the new g, solving one scalar quartic per
K^C point.
"""
from dataclasses import dataclass, replace

import numpy as np

from .boundary import apply_full_bc, interpolate_h
from .model import planck


class StepFailure(RuntimeError):
    """A time step could not be completed; ``info`` carries diagnostics."""

    def __init__(self, msg, info=None):
        super().__init__(msg)
        self.info = info or {}


@dataclass
class FullState:
    g: np.ndarray
    h: np.ndarray
    T: np.ndarray
    t: float = 0.0
    step: int = 0


@dataclass
class NewtonStats:
    iterations: int = 0
    bisected: int = 0


def solve_temperature(alpha, beta, rhs, T0, rtol=1e-12, maxiter=50):
    """Solve ``alpha*T + beta*T**4 = rhs`` for T >= 0, elementwise.

    Newton's method from ``T0``; the left side is convex and increasing on
    T >= 0, so after the first step the iterates approach the root from
    above.  Points that fail to converge fall back to bisection on
    ``[0, T_hi]`` with ``T_hi`` the smaller of the two one-term bounds.

    Returns
    -------
    T : ndarray
    stats : NewtonStats
    """
    alpha, beta, rhs = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (alpha, beta, rhs)))
    if np.any(rhs < 0):
        bad = np.flatnonzero(rhs < 0)
        raise StepFailure("temperature equation has no non-negative root",
                          {"points": bad[:10].tolist(), "rhs": rhs[bad[:10]].tolist()})
    T = np.array(np.broadcast_to(T0, rhs.shape), dtype=float)
    scale = np.maximum(np.abs(rhs), np.finfo(float).tiny)
    active = np.ones(rhs.shape, dtype=bool)
    it = 0
    for it in range(1, maxiter + 1):
        F = alpha * T + beta * T**4 - rhs
        conv = np.abs(F) <= rtol * scale
        active &= ~conv
        if not active.any():
            it -= 1
            break
        dF = alpha + 4.0 * beta * T**3
        T = np.where(active, T - F / dF, T)
        T = np.where(active & (T < 0), 0.0, T)
    else:
        F = alpha * T + beta * T**4 - rhs
        active &= np.abs(F) > rtol * scale
    stats = NewtonStats(iterations=it, bisected=int(active.sum()))
    if active.any():
        idx = np.flatnonzero(active)
        a, b, r = alpha[idx], beta[idx], rhs[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = np.minimum(np.where(a > 0, r / a, np.inf), np.where(b > 0, (r / b) ** 0.25, np.inf))
        lo = np.zeros_like(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f = a * mid + b * mid**4 - r
            lo = np.where(f < 0, mid, lo)
            hi = np.where(f < 0, hi, mid)
        T[idx] = 0.5 * (lo + hi)
        F = alpha[idx] * T[idx] + beta[idx] * T[idx]**4 - rhs[idx]
        if np.any(np.abs(F) > 1e3 * rtol * scale[idx]):
            raise StepFailure("temperature solve did not converge", {"points": idx[:10].tolist()})
    return T, stats


def transport(g, disc):
    """Upwind advection L g = sum_v (D_v^+ g Q_v^- + D_v^- g Q_v^+)."""
    ops, ang = disc.ops, disc.ang
    out = ops.Dp["x"] @ (g * ang.Qminus_x) + ops.Dm["x"] @ (g * ang.Qplus_x)
    out += ops.Dp["y"] @ (g * ang.Qminus_y) + ops.Dm["y"] @ (g * ang.Qplus_y)
    return out


def remove_mean(G, w):
    """Right-multiply by (I - 1 w^T / 2pi)^T: subtract each row's w-mean."""
    return G - np.outer(G @ w, np.ones(w.size)) / (2.0 * np.pi)


def scalar_flux(T, h, disc):
    """phi = B(T) + eps^2 h on K^C."""
    return disc.planck(T) + disc.params.eps**2 * h


def flux_divergence(Fx, Fy, disc):
    """(1 / 2pi) sum_v D0_v F_v for normal fluxes F_v = g Q_v w on K^I."""
    return (disc.ops.D0["x"] @ Fx + disc.ops.D0["y"] @ Fy) / (2.0 * np.pi)


def step_micro(state, disc, dt):
    """Return g^{n+1} from the pointwise-implicit micro equation."""
    p, ang, ops = disc.params, disc.ang, disc.ops
    eps = p.eps
    c0 = eps**2 / (p.c * dt)
    denom = c0 + p.sigma_t_I
    if np.any(denom <= 0):
        raise StepFailure("micro denominator vanishes (eps = 0 in vacuum)")
    phi = scalar_flux(state.T, state.h, disc)
    rhs = -(np.outer(disc.gradient(phi, "x"), ang.Q_x) + np.outer(disc.gradient(phi, "y"), ang.Q_y))
    if eps != 0:
        rhs += c0 * state.g - eps * remove_mean(transport(state.g, disc), ang.w)
    return rhs / denom[:, None]


def macro_update(T, h, div, disc, dt):
    """Advance (h, T) at every K^C point given the flux divergence of g^{n+1}.

    Eliminates h^{n+1} = c_nu (T^{n+1} - T^n) / (2 pi sigma_a dt) and solves
    the resulting quartic for T^{n+1}.  Vacuum points keep T and update h
    explicitly; Dirichlet wall points are reset to their wall data with h = 0.
    """
    p = disc.params
    eps2 = p.eps**2
    beta = 1.0 / (p.c * dt)
    kB = p.a * p.c / (2.0 * np.pi)
    sa, cv = p.sigma_a_C, p.cv_C
    absorbing = sa > 0
    T_new = T.copy()
    h_new = h.copy()
    stats = NewtonStats()
    if absorbing.any():
        m = absorbing
        gamma = cv[m] / (2.0 * np.pi * sa[m] * dt)
        alpha = (eps2 * beta + sa[m]) * gamma
        rhs = alpha * T[m] + beta * kB * T[m]**4 + eps2 * beta * h[m] - div[m]
        T_new[m], stats = solve_temperature(alpha, beta * kB, rhs, T[m])
        h_new[m] = gamma * (T_new[m] - T[m])
    if (~absorbing).any():
        if eps2 == 0:
            raise StepFailure("eps = 0 leaves h undetermined in vacuum")
        m = ~absorbing
        h_new[m] = h[m] - div[m] / (eps2 * beta)
    idx, val = disc.dirichlet
    T_new[idx] = val
    h_new[idx] = 0.0
    return h_new, T_new, stats


def step_macro(state, g_next, disc, dt):
    """Return (h^{n+1}, T^{n+1}, NewtonStats) for the dense micro field."""
    w = disc.ang.w
    div = flux_divergence(g_next @ (disc.ang.Q_x * w), g_next @ (disc.ang.Q_y * w), disc)
    return macro_update(state.T, state.h, div, disc, dt)


def step_full(state, disc, dt):
    """One IMEX step: micro update, wall rows, macro update."""
    g = step_micro(state, disc, dt)
    if disc.boundary is not None and disc.grid.boundary_I.size:
        g = apply_full_bc(g, disc, interpolate_h(disc.grid, state.h))
    h, T, stats = step_macro(state, g, disc, dt)
    new = replace(state, g=g, h=h, T=T, t=state.t + dt, step=state.step + 1)
    return new, stats


def initial_full_state(T0, disc):
    """Equilibrium start: g = 0, h = 0."""
    T0 = np.asarray(T0, dtype=float).copy()
    if np.any(T0 < 0):
        raise ValueError("negative initial temperature")
    return FullState(g=np.zeros((disc.grid.n_I, disc.quad.n_dirs)), h=np.zeros(disc.grid.n_C), T=T0)


__all__ = ["FullState", "StepFailure", "solve_temperature", "transport", "remove_mean",
           "scalar_flux", "flux_divergence", "step_micro", "step_macro", "macro_update",
           "step_full", "initial_full_state", "planck"]
