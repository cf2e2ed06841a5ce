"""Reflection-transmission walls with equilibrium inflow.

For incoming directions (n . Omega < 0) the micro field at a wall row obeys

    g(Omega) = rho * g(Omega') - (1 - rho) * eps * h,

where Omega' is the specular reflection of Omega.  Outgoing directions are
left untouched.  Walls with rho < 1 also pin the temperature of the cell
centers lying on them.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import planck

WALLS = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class WallSpec:
    rho: float
    T_B: float
    f_B: float = None

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"reflectivity must lie in [0, 1], got {self.rho}")
        if self.T_B < 0:
            raise ValueError("wall temperature must be non-negative")


@dataclass(frozen=True)
class BoundarySpec:
    """Per-wall reflectivity and temperature."""

    walls: dict

    def __post_init__(self):
        missing = set(WALLS) - set(self.walls)
        if missing:
            raise ValueError(f"boundary spec misses walls {sorted(missing)}")

    def check_equilibrium(self, a, c, rtol=1e-12):
        """Reject transmitted densities that are not the wall Planckian."""
        for name, w in self.walls.items():
            if w.f_B is None:
                continue
            fb = planck(w.T_B, a, c)
            if (1.0 - w.rho) * abs(w.f_B - fb) > rtol * max(abs(fb), 1e-300):
                raise ValueError(f"wall {name!r} violates the equilibrium condition")

    def row_rho(self, grid):
        """Reflectivity per boundary row of ``grid`` (order of grid.boundary_I)."""
        return np.concatenate([np.full(grid.wall_I[n].size, self.walls[n].rho) for n in WALLS])

    def dirichlet_points(self, grid):
        """K^C indices on walls with rho < 1 and their fixed temperatures.

        A domain corner shared by two such walls takes the value of the wall
        listed first in ``WALLS``.
        """
        idx, val = [], []
        seen = set()
        for name in WALLS:
            w = self.walls[name]
            if w.rho >= 1.0:
                continue
            for k in grid.wall_C[name]:
                if k not in seen:
                    seen.add(int(k))
                    idx.append(int(k))
                    val.append(w.T_B)
        order = np.argsort(idx, kind="stable")
        return np.asarray(idx, dtype=np.int64)[order], np.asarray(val, dtype=float)[order]


def uniform_walls(rho, T_B):
    return BoundarySpec({n: WallSpec(rho, T_B) for n in WALLS})


def _row_geometry(grid, quad):
    """Incoming masks and reflection partners for every boundary row."""
    normals = grid.boundary_normals
    ndot = normals @ quad.directions.T
    incoming = ndot < 0
    partner = np.where(np.abs(normals[:, :1]) > 0, quad.reflect_x[None, :], quad.reflect_y[None, :])
    return incoming, partner


def interpolate_h(grid, h):
    """Linear interpolation of a K^C field to the boundary rows of K^I.

    Each wall interface point sits halfway between two wall nodes of K^C,
    so the interpolant is their mean.
    """
    ab = grid.ab_I[grid.boundary_I]
    n = grid.boundary_normals
    ta = (n[:, 1] != 0).astype(int)  # walls with a y normal run along x
    tb = 1 - ta
    lo = grid.fine_C[ab[:, 0] - ta, ab[:, 1] - tb]
    hi = grid.fine_C[ab[:, 0] + ta, ab[:, 1] + tb]
    if np.any(lo < 0) or np.any(hi < 0):
        raise RuntimeError("boundary row has no K^C neighbours along the wall")
    return 0.5 * (h[lo] + h[hi])


def boundary_rows(g_rows, h_rows, eps, rho_rows, incoming, partner):
    """Apply the reflection-transmission rule to a block of wall rows."""
    refl = np.take_along_axis(g_rows, partner, axis=1)
    target = rho_rows[:, None] * refl - ((1.0 - rho_rows) * eps * h_rows)[:, None]
    return np.where(incoming, target, g_rows)


def apply_full_bc(g, disc, h_interp):
    """Return a copy of the dense micro field with wall rows imposed."""
    grid = disc.grid
    if disc.boundary is None or grid.boundary_I.size == 0:
        return g
    incoming, partner = _row_geometry(grid, disc.quad)
    rows = grid.boundary_I
    out = g.copy()
    out[rows] = boundary_rows(g[rows], h_interp, disc.params.eps,
                              disc.boundary.row_rho(grid), incoming, partner)
    return out


def impose_lowrank_bc(X, S, V, disc, h_interp):
    """Impose the wall rule on a factorised micro field.

    The wall rows of ``X S V^T`` are replaced by the rule applied to them,
    projected onto span(V); the spatial factor and coefficients are then
    recomputed from a QR factorisation.  V is unchanged.
    """
    grid = disc.grid
    if disc.boundary is None or grid.boundary_I.size == 0:
        return X, S
    incoming, partner = _row_geometry(grid, disc.quad)
    rows = grid.boundary_I
    K = X @ S
    g_tilde = K[rows] @ V.T
    g_hat = boundary_rows(g_tilde, h_interp, disc.params.eps,
                          disc.boundary.row_rho(grid), incoming, partner)
    K[rows] = g_hat @ V
    Xn, Sn = np.linalg.qr(K)
    return Xn, Sn


def boundary_h_consistency(g_boundary, normals, rho, quad, eps):
    """Wall value of h that balances the quadrature flux at each wall row.

    Solves ``eps * (1 - rho) * sum_in w h = (1 + rho) * sum_out w g`` row by
    row, which makes the wall rows of g mean free after imposition.
    """
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (g_boundary.shape[0],))
    if np.any(rho >= 1.0):
        raise ValueError("h needs no wall data on purely reflective walls")
    ndot = np.asarray(normals) @ quad.directions.T
    w = quad.weights
    rhs = (1.0 + rho) * np.sum(np.where(ndot > 0, w * g_boundary, 0.0), axis=1)
    lhs_coef = eps * (1.0 - rho) * np.sum(np.where(ndot < 0, w, 0.0), axis=1)
    if eps == 0:
        if np.any(rhs != 0):
            raise ValueError("eps = 0 is incompatible with nonzero outgoing flux data")
        return np.zeros_like(rhs)
    return rhs / lhs_coef


def wall_gradient_closure(grid, boundary, a, c):
    """Correction that turns the mirrored d0 into a Dirichlet difference.

    On a wall row of a wall with rho < 1 the ghost value of the scalar flux
    is mirrored about the wall value B(T_B) rather than about the interior
    neighbour, giving ``2 (phi_in - B(T_B)) / dzeta`` up to the sign of the
    normal.  Returns, per axis, a sparse matrix C and a vector s such that
    ``d0 @ phi + C @ phi + s`` is the closed difference.
    """
    out = {}
    rows = grid.boundary_I
    ab = grid.ab_I[rows]
    normals = grid.boundary_normals
    rho = boundary.row_rho(grid) if boundary is not None else np.ones(rows.size)
    T_B = (np.concatenate([np.full(grid.wall_I[n].size, boundary.walls[n].T_B) for n in WALLS])
           if boundary is not None else np.zeros(rows.size))
    for j, v in enumerate(("x", "y")):
        nv = normals[:, j]
        sel = (nv != 0) & (rho < 1.0)
        h = grid.spacing(v)
        step = nv[sel].astype(int)
        inner_a = ab[sel, 0] - (step if j == 0 else 0)
        inner_b = ab[sel, 1] - (step if j == 1 else 0)
        cols = grid.fine_C[inner_a, inner_b]
        C = sp.coo_matrix((-2.0 * nv[sel] / h, (rows[sel], cols)), shape=(grid.n_I, grid.n_C)).tocsr()
        s = np.zeros(grid.n_I)
        s[rows[sel]] = 2.0 * nv[sel] * planck(T_B[sel], a, c) / h
        out[v] = (C, s)
    return out
