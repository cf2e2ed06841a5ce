"""Energy, mass, CFL bound and related run-time checks.

Grid sums use the control-volume weights of the grid (all ones on a
periodic grid, one half for points lying on a wall) times dx*dy.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np


class EnergyIncrease(RuntimeError):
    pass


@dataclass
class StepRecord:
    t: float
    energy: float
    mass: float
    rank: int
    dt: float
    newton_iterations: int = 0
    newton_bisected: int = 0
    cfl: float = float("nan")
    flags: list = field(default_factory=list)


def _h(state):
    """h of a kinetic state; the diffusion state carries none."""
    return getattr(state, "h", 0.0)


def _cell_sum(values, weights, dzeta):
    return float(np.sum(weights * values) * dzeta)


def g_norm_sq(state, disc):
    """sum_kappa w_kappa sum_l w_l g^2, dense or factor-wise."""
    wI = disc.grid.weights_I
    w = disc.ang.w
    if hasattr(state, "g"):
        return float(np.sum(wI[:, None] * w[None, :] * state.g**2))
    if not hasattr(state, "X"):
        return 0.0
    X, S, V = state.X, state.S, state.V
    A = X.T @ (wI[:, None] * X)
    Bm = V.T @ (w[:, None] * V)
    return float(np.einsum("ij,jk,lk,il->", A, S, Bm, S, optimize=True))


def energy(state, disc):
    """Discrete energy of a full or low-rank state.

    ||B/c + eps^2 h/c||^2 + ||eps g/c||_Omega^2 / (2 pi)
        + 2/5 ||sqrt(a c_nu) T^{5/2} / (2 pi)||^2
    """
    p, grid = disc.params, disc.grid
    T = np.asarray(state.T)
    if np.any(T < 0):
        raise ValueError("negative temperature in energy")
    dz = grid.dzeta
    phi = disc.planck(T) + p.eps**2 * _h(state)
    e1 = _cell_sum((phi / p.c) ** 2, grid.weights_C, dz)
    e2 = (p.eps / p.c) ** 2 * g_norm_sq(state, disc) * dz / (2.0 * np.pi)
    e3 = 0.4 * _cell_sum(p.a * p.cv_C * T**5 / (2.0 * np.pi) ** 2, grid.weights_C, dz)
    return e1 + e2 + e3


def mass(state, disc):
    """sum over K^C of (2 pi / c) phi + c_nu T, times the cell area."""
    p, grid = disc.params, disc.grid
    phi = disc.planck(state.T) + p.eps**2 * _h(state)
    return _cell_sum(2.0 * np.pi / p.c * phi + p.cv_C * state.T, grid.weights_C, grid.dzeta)


def cfl_formula(eps, c, spacings, omegas, sigma_t0):
    """(1 / 3c) min over axes and nonzero |Omega_v| of
    eps dv + sigma_t0 dv^2 / (4 |Omega_v|).

    ``spacings`` and ``omegas`` are matched per axis; zero components are
    skipped.
    """
    best = np.inf
    for d, om in zip(spacings, omegas):
        a = np.abs(np.asarray(om, dtype=float))
        a = a[a > 0]
        if a.size:
            best = min(best, float(np.min(eps * d + sigma_t0 * d**2 / (4.0 * a))))
    if not np.isfinite(best) or best <= 0:
        raise ValueError("CFL bound is zero: eps = 0 in vacuum")
    return best / (3.0 * c)


def cfl_bound(disc, sigma_t0=None):
    """Largest step for which the energy estimate holds (see cfl_formula)."""
    p, grid = disc.params, disc.grid
    if sigma_t0 is None:
        sigma_t0 = float(np.min(p.sigma_t_I))
    if sigma_t0 <= 0 and not p.allow_vacuum:
        raise ValueError("sigma_t0 <= 0: vacuum scenarios must set allow_vacuum")
    return cfl_formula(p.eps, p.c, (grid.dx, grid.dy),
                       (disc.quad.omega_x, disc.quad.omega_y), max(sigma_t0, 0.0))


def radiation_temperature(state, disc):
    """(2 pi (B + eps^2 h) / (a c))^{1/4}, negative values clamped to zero."""
    p = disc.params
    phi = disc.planck(state.T) + p.eps**2 * _h(state)
    if np.any(phi < 0):
        warnings.warn(f"clamping {int(np.sum(phi < 0))} negative scalar flux values", RuntimeWarning)
    clamped = np.maximum(phi, 0.0)
    return (2.0 * np.pi * clamped / (p.a * p.c)) ** 0.25


def relative_error(a, b, weights=None):
    """Discrete L2 relative difference ||a - b|| / ||b||."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if weights is None:
        weights = np.ones_like(b)
    den = np.sqrt(np.sum(weights * b**2))
    if den == 0:
        raise ZeroDivisionError("reference field has zero norm")
    return float(np.sqrt(np.sum(weights * (a - b) ** 2)) / den)


def check_energy(e_new, e_old, e0, mode="strict", tol=1e-12):
    """Return True if the energy did not grow; raise in strict mode."""
    ok = e_new <= e_old + tol * e0
    if not ok and mode == "strict":
        raise EnergyIncrease(f"energy grew from {e_old:.17g} to {e_new:.17g}")
    return ok
