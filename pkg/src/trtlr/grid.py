"""Staggered lattices and sparse difference operators.

All points live on a fine lattice with half-cell spacing (dx/2, dy/2) and
integer indices (a, b).  Cell centers have (even, even) indices, corners
(odd, odd); together they form the lattice K^C that carries T and h.  Edge
midpoints with mixed parity form K^I, which carries the micro field g.
Every operator below is a shift by one or two fine indices, so a single
index arithmetic serves both sub-lattices of each family.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

CLOSURES = ("periodic", "dirichlet-ghost")


@dataclass(frozen=True)
class StaggeredGrid:
    """Two interleaved point lattices on a rectangle.

    With ``periodic=False`` the first and last cell centers sit on the walls,
    ``x_i = x_L + (i - 1) dx`` with ``dx = (x_R - x_L) / (n_x - 1)``.  With
    ``periodic=True`` the domain wraps and ``dx = (x_R - x_L) / n_x``.

    Storage order of K^I: edge midpoints (x_i, y_{j+1/2}) then
    (x_{i+1/2}, y_j), each row-major with y outermost.  K^C: centers then
    corners, same ordering rule.
    """

    n_x: int
    n_y: int
    domain: tuple
    periodic: bool
    dx: float
    dy: float
    n_a: int
    n_b: int
    ab_I: np.ndarray
    ab_C: np.ndarray
    fine_I: np.ndarray
    fine_C: np.ndarray
    interface_points: np.ndarray
    center_points: np.ndarray
    boundary_I: np.ndarray
    boundary_normals: np.ndarray
    weights_I: np.ndarray
    weights_C: np.ndarray
    wall_C: dict = field(default_factory=dict)
    wall_I: dict = field(default_factory=dict)

    @property
    def dzeta(self):
        return self.dx * self.dy

    @property
    def n_I(self):
        return self.ab_I.shape[0]

    @property
    def n_C(self):
        return self.ab_C.shape[0]

    @property
    def n_centers(self):
        return self.n_x * self.n_y

    def spacing(self, v):
        return self.dx if v == "x" else self.dy

    def idx_I(self, a, b):
        """Flat K^I index of fine multi-index (a, b); -1 if not on K^I."""
        return self.fine_I[a, b]

    def idx_C(self, a, b):
        return self.fine_C[a, b]

    def centers_view(self, u):
        """Reshape the center block of a K^C field to (n_y, n_x)."""
        return np.asarray(u)[: self.n_centers].reshape(self.n_y, self.n_x)

    def corners_view(self, u):
        ncx = self.n_a // 2
        ncy = self.n_b // 2
        return np.asarray(u)[self.n_centers:].reshape(ncy, ncx)


def _enumerate(a_vals, b_vals):
    aa, bb = np.meshgrid(a_vals, b_vals, indexing="xy")
    return np.column_stack([aa.ravel(), bb.ravel()])


def build_grid(n_x, n_y, domain=(0.0, 1.0, 0.0, 1.0), periodic=False):
    """Build the staggered grid.

    Parameters
    ----------
    n_x, n_y : int
        Number of cell centers per axis (at least 3).
    domain : tuple
        ``(x_L, x_R, y_B, y_T)``.
    periodic : bool
        Wrap both axes.
    """
    if n_x < 3 or n_y < 3:
        raise ValueError("n_x and n_y must be >= 3")
    xl, xr, yb, yt = map(float, domain)
    if not (xr > xl and yt > yb):
        raise ValueError(f"degenerate domain {domain}")
    if periodic:
        dx, dy = (xr - xl) / n_x, (yt - yb) / n_y
        n_a, n_b = 2 * n_x, 2 * n_y
    else:
        dx, dy = (xr - xl) / (n_x - 1), (yt - yb) / (n_y - 1)
        n_a, n_b = 2 * n_x - 1, 2 * n_y - 1
    ev_a, od_a = np.arange(0, n_a, 2), np.arange(1, n_a, 2)
    ev_b, od_b = np.arange(0, n_b, 2), np.arange(1, n_b, 2)

    ab_I = np.vstack([_enumerate(ev_a, od_b), _enumerate(od_a, ev_b)])
    ab_C = np.vstack([_enumerate(ev_a, ev_b), _enumerate(od_a, od_b)])
    fine_I = -np.ones((n_a, n_b), dtype=np.int64)
    fine_C = -np.ones((n_a, n_b), dtype=np.int64)
    fine_I[ab_I[:, 0], ab_I[:, 1]] = np.arange(len(ab_I))
    fine_C[ab_C[:, 0], ab_C[:, 1]] = np.arange(len(ab_C))

    def coords(ab):
        return np.column_stack([xl + 0.5 * dx * ab[:, 0], yb + 0.5 * dy * ab[:, 1]])

    wall_C, wall_I = {}, {}
    if periodic:
        boundary_I = np.zeros(0, dtype=np.int64)
        normals = np.zeros((0, 2))
        w_I = np.ones(len(ab_I))
        w_C = np.ones(len(ab_C))
    else:
        A, B = n_a - 1, n_b - 1
        walls = {
            "left": (ab_I[:, 0] == 0, (-1.0, 0.0), ab_C[:, 0] == 0),
            "right": (ab_I[:, 0] == A, (1.0, 0.0), ab_C[:, 0] == A),
            "bottom": (ab_I[:, 1] == 0, (0.0, -1.0), ab_C[:, 1] == 0),
            "top": (ab_I[:, 1] == B, (0.0, 1.0), ab_C[:, 1] == B),
        }
        idx, nrm = [], []
        for name, (mask_i, normal, mask_c) in walls.items():
            k = np.flatnonzero(mask_i)
            wall_I[name] = k
            wall_C[name] = np.flatnonzero(mask_c)
            idx.append(k)
            nrm.append(np.tile(normal, (k.size, 1)))
        boundary_I = np.concatenate(idx)
        normals = np.vstack(nrm)
        # trapezoidal control volumes: points on a wall own half a cell
        def wt(a, b):
            wa = np.where((a == 0) | (a == A), 0.5, 1.0)
            wb = np.where((b == 0) | (b == B), 0.5, 1.0)
            return wa * wb
        w_I = wt(ab_I[:, 0], ab_I[:, 1])
        w_C = wt(ab_C[:, 0], ab_C[:, 1])

    arrays = [ab_I, ab_C, fine_I, fine_C, boundary_I, normals, w_I, w_C]
    for arr in arrays:
        arr.setflags(write=False)
    return StaggeredGrid(
        n_x=int(n_x), n_y=int(n_y), domain=(xl, xr, yb, yt), periodic=bool(periodic),
        dx=dx, dy=dy, n_a=n_a, n_b=n_b, ab_I=ab_I, ab_C=ab_C,
        fine_I=fine_I, fine_C=fine_C,
        interface_points=coords(ab_I), center_points=coords(ab_C),
        boundary_I=boundary_I, boundary_normals=normals,
        weights_I=w_I, weights_C=w_C, wall_C=wall_C, wall_I=wall_I,
    )


@dataclass(frozen=True)
class DiffOps:
    """Sparse difference operators, keyed by axis ``'x'`` / ``'y'``.

    Dp, Dm, Dc : K^I -> K^I (forward, backward, wide centered)
    D0 : K^I -> K^C (centered, acts on interface fields)
    d0 : K^C -> K^I (centered, acts on center/corner scalars)
    """

    closure: str
    Dp: dict
    Dm: dict
    Dc: dict
    D0: dict
    d0: dict
    dx: float
    dy: float

    def spacing(self, v):
        return self.dx if v == "x" else self.dy


def _stencil(grid, rows_ab, target_fine, n_target, shifts, ghost):
    """Assemble a sparse matrix from a list of (da, db, coef) shifts.

    ``ghost`` resolves indices outside a bounded lattice: ``'zero'`` drops the
    entry, ``'even'`` mirrors it about the wall, ``'odd'`` mirrors it with a
    sign change.
    """
    n_a, n_b = grid.n_a, grid.n_b
    rows, cols, vals = [], [], []
    r = np.arange(len(rows_ab))
    for da, db, coef in shifts:
        a = rows_ab[:, 0] + da
        b = rows_ab[:, 1] + db
        c = np.full(a.shape, float(coef))
        keep = np.ones(a.shape, dtype=bool)
        if grid.periodic:
            a %= n_a
            b %= n_b
        else:
            for idx, n in ((a, n_a), (b, n_b)):
                lo, hi = idx < 0, idx > n - 1
                out = lo | hi
                if ghost == "zero":
                    keep &= ~out
                else:
                    idx[lo] = -idx[lo]
                    idx[hi] = 2 * (n - 1) - idx[hi]
                    if ghost == "odd":
                        c[out] = -c[out]
        col = target_fine[a[keep], b[keep]]
        if np.any(col < 0):
            raise RuntimeError("stencil landed off the target lattice")
        rows.append(r[keep])
        cols.append(col)
        vals.append(c[keep])
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(rows_ab), n_target),
    )
    return mat.tocsr()


def build_diff_ops(grid, closure=None):
    """Build the difference operators for ``grid``.

    Parameters
    ----------
    closure : {'periodic', 'dirichlet-ghost'}, optional
        Defaults to the closure implied by ``grid.periodic``.  With the
        Dirichlet closure, interface fields see zero ghost values (the
        equilibrium inflow data), scalar fields are mirrored evenly across
        the wall, and interface fluxes entering D0 are mirrored oddly, so a
        wall carries no net normal flux through its ghost layer.  The even
        mirror is the reflective-wall closure of d0; transmitting walls
        replace it through ``Discretization.gradient``.
    """
    expected = "periodic" if grid.periodic else "dirichlet-ghost"
    if closure is None:
        closure = expected
    if closure not in CLOSURES:
        raise ValueError(f"unknown closure {closure!r}; expected one of {CLOSURES}")
    if closure != expected:
        raise ValueError(f"closure {closure!r} does not match grid (periodic={grid.periodic})")

    ops = {k: {} for k in ("Dp", "Dm", "Dc", "D0", "d0")}
    nI, nC = grid.n_I, grid.n_C
    for v, (ea, eb) in (("x", (1, 0)), ("y", (0, 1))):
        h = grid.spacing(v)
        s1 = (ea, eb)
        s2 = (2 * ea, 2 * eb)
        ops["Dp"][v] = _stencil(grid, grid.ab_I, grid.fine_I, nI,
                                [(*s2, 1 / h), (0, 0, -1 / h)], "zero")
        ops["Dm"][v] = _stencil(grid, grid.ab_I, grid.fine_I, nI,
                                [(0, 0, 1 / h), (-s2[0], -s2[1], -1 / h)], "zero")
        ops["Dc"][v] = _stencil(grid, grid.ab_I, grid.fine_I, nI,
                                [(*s2, 0.5 / h), (-s2[0], -s2[1], -0.5 / h)], "zero")
        ops["D0"][v] = _stencil(grid, grid.ab_C, grid.fine_I, nI,
                                [(*s1, 1 / h), (-s1[0], -s1[1], -1 / h)], "odd")
        ops["d0"][v] = _stencil(grid, grid.ab_I, grid.fine_C, nC,
                                [(*s1, 1 / h), (-s1[0], -s1[1], -1 / h)], "even")
    return DiffOps(closure=closure, dx=grid.dx, dy=grid.dy, **ops)
