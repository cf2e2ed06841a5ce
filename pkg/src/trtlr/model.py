"""Physical parameters and the discretisation bundle shared by all solvers."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import build_diff_ops, build_grid
from .quadrature import angular_ops, build_quadrature


@dataclass(frozen=True)
class PhysParams:
    """Material data and constants.

    Cross sections and heat capacity are stored on both lattices:
    ``*_I`` on the interface lattice K^I (used by the micro equation),
    ``*_C`` on the center/corner lattice K^C (used by the macro equation).
    ``cv_C`` is the volumetric heat capacity rho*c_nu.
    """

    a: float
    c: float
    eps: float
    sigma_a_I: np.ndarray
    sigma_s_I: np.ndarray
    sigma_a_C: np.ndarray
    sigma_s_C: np.ndarray
    cv_C: np.ndarray
    allow_vacuum: bool = False

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.a <= 0 or self.c <= 0:
            raise ValueError("a and c must be positive")
        for name in ("sigma_a_I", "sigma_s_I", "sigma_a_C", "sigma_s_C"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be non-negative")
        if np.any(self.cv_C <= 0):
            raise ValueError("heat capacity must be positive")
        if not self.allow_vacuum and (np.any(self.sigma_a_C <= 0) or np.any(self.sigma_t_I <= 0)):
            raise ValueError("vacuum regions (sigma_a = 0) need allow_vacuum=True")

    @property
    def sigma_t_I(self):
        return self.sigma_a_I + self.sigma_s_I

    @property
    def sigma_t_C(self):
        return self.sigma_a_C + self.sigma_s_C

    def with_eps(self, eps):
        return PhysParams(self.a, self.c, eps, self.sigma_a_I, self.sigma_s_I,
                          self.sigma_a_C, self.sigma_s_C, self.cv_C, self.allow_vacuum)


def uniform_params(grid, a, c, eps, sigma_a, sigma_s=0.0, cv=1.0, allow_vacuum=False):
    """Spatially constant material on ``grid``."""
    nI, nC = grid.n_I, grid.n_C
    return PhysParams(
        a=float(a), c=float(c), eps=float(eps),
        sigma_a_I=np.full(nI, float(sigma_a)), sigma_s_I=np.full(nI, float(sigma_s)),
        sigma_a_C=np.full(nC, float(sigma_a)), sigma_s_C=np.full(nC, float(sigma_s)),
        cv_C=np.full(nC, float(cv)), allow_vacuum=allow_vacuum,
    )


def planck(T, a, c):
    """Gray emission B(T) = a c T^4 / (2 pi) on the projected sphere."""
    T = np.asarray(T, dtype=float)
    if np.any(T < 0):
        raise ValueError("negative temperature passed to planck")
    return a * c / (2.0 * np.pi) * T**4


@dataclass(frozen=True)
class Discretization:
    """Everything a time step needs besides the state itself."""

    grid: object
    ops: object
    quad: object
    ang: object
    params: PhysParams
    boundary: object = None

    def planck(self, T):
        return planck(T, self.params.a, self.params.c)

    def with_eps(self, eps):
        return Discretization(self.grid, self.ops, self.quad, self.ang,
                              self.params.with_eps(eps), self.boundary)

    def with_params(self, params):
        return Discretization(self.grid, self.ops, self.quad, self.ang, params, self.boundary)

    @cached_property
    def dirichlet(self):
        """K^C indices and values held fixed by the walls (may be empty)."""
        if self.boundary is None or self.grid.periodic:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        return self.boundary.dirichlet_points(self.grid)

    @cached_property
    def _gradient_ops(self):
        from .boundary import wall_gradient_closure
        if self.boundary is None or self.grid.periodic:
            return {v: (self.ops.d0[v], None) for v in ("x", "y")}
        close = wall_gradient_closure(self.grid, self.boundary, self.params.a, self.params.c)
        return {v: (self.ops.d0[v] + close[v][0], close[v][1]) for v in ("x", "y")}

    def gradient(self, phi, v):
        """d0_v phi with Dirichlet walls closed by their Planckian."""
        D, s = self._gradient_ops[v]
        out = D @ phi
        return out if s is None else out + s


def make_discretization(n_x, n_y, order, domain=(0.0, 1.0, 0.0, 1.0), periodic=False,
                        params=None, boundary=None):
    """Convenience constructor; ``params`` may be a callable ``grid -> PhysParams``."""
    grid = build_grid(n_x, n_y, domain, periodic=periodic)
    ops = build_diff_ops(grid)
    quad = build_quadrature(order)
    ang = angular_ops(quad)
    if callable(params):
        params = params(grid)
    return Discretization(grid, ops, quad, ang, params, boundary)
