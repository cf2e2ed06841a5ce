"""Benchmark problems: Gaussian hot spot, Marshak wave, hohlraum.

The solver core is unit-agnostic; each scenario fixes a consistent unit
system and records it in ``units``.

* gaussian / marshak: length cm, time ps, temperature eV, energy erg.
* hohlraum: length cm, time ns, temperature keV, energy GJ.
"""
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundarySpec, WallSpec
from .model import PhysParams

K_PER_EV = 11604.518
C_CM_PER_PS = 2.99792458e10 * 1e-12
A_ERG_CM3_EV4 = 7.565766e-15 * K_PER_EV**4
# rho * c_nu with rho = 0.01 g/cm^3 and c_nu = 0.831e5 per gram and kelvin,
# converted to a per-eV capacity
RHO_CV_EV = 0.01 * 0.831e5 * K_PER_EV
SIGMA_A_GAUSS = 10799.13607


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: tuple
    n_x: int
    n_y: int
    quad_order: int
    eps: float
    t_end: float
    a: float
    c: float
    materials: object  # callable (points) -> (sigma_a, sigma_s, rho_cv)
    T_init: object  # callable (points) -> T
    boundary: BoundarySpec
    units: dict = field(default_factory=dict)
    allow_vacuum: bool = False
    assert_mode: str = "strict"

    def params(self, grid, eps=None):
        eps = self.eps if eps is None else eps
        sa_I, ss_I, _ = self.materials(grid.interface_points)
        sa_C, ss_C, cv_C = self.materials(grid.center_points)
        return PhysParams(a=self.a, c=self.c, eps=float(eps),
                          sigma_a_I=sa_I, sigma_s_I=ss_I, sigma_a_C=sa_C, sigma_s_C=ss_C,
                          cv_C=cv_C, allow_vacuum=self.allow_vacuum)


def _uniform_material(sigma_a, rho_cv, sigma_s=0.0):
    def materials(pts):
        n = len(pts)
        return np.full(n, sigma_a), np.full(n, sigma_s), np.full(n, rho_cv)
    return materials


def gaussian_temperature(pts, center=(0.001, 0.001), width=1e-4, t_max=80.0, t_min=0.02):
    """Gaussian profile rescaled to peak ``t_max`` on the given points, floored at ``t_min``."""
    r2 = np.sum((np.asarray(pts) - np.asarray(center)) ** 2, axis=1)
    prof = np.exp(-r2 / (2.0 * width**2))
    peak = prof.max()
    if peak == 0:
        return np.full(len(r2), float(t_min))
    return np.maximum(t_max * prof / peak, t_min)


def hohlraum_absorber(pts):
    """True where a point lies in the absorbing walls or blocks."""
    x, y = np.asarray(pts)[:, 0], np.asarray(pts)[:, 1]
    top = y >= 0.95
    bottom = y <= 0.05
    right = x >= 0.95
    left_block = (x <= 0.05) & (y >= 0.25) & (y <= 0.75)
    center = (x >= 0.25) & (x <= 0.75) & (y >= 0.25) & (y <= 0.75)
    return top | bottom | right | left_block | center


def _hohlraum_material(pts):
    absorber = hohlraum_absorber(pts)
    sa = np.where(absorber, 100.0, 0.0)
    cv = np.where(absorber, 5.0e5, 1.0e99)
    return sa, np.zeros(len(pts)), cv


BENCHMARK = {
    "gaussian": dict(n=52, q=30, t_end=5.0),
    "marshak": dict(n=52, q=30, t_end=5.0),
    "hohlraum": dict(n=102, q=30, t_end=1.0),
}
DESK = {
    "gaussian": dict(n=20, q=8, t_end=0.5),
    "marshak": dict(n=20, q=8, t_end=1.0),
    "hohlraum": dict(n=20, q=8, t_end=0.1),
}


def builtin_scenario(name, scale="benchmark"):
    """Return one of the built-in benchmark problems.

    Parameters
    ----------
    name : {'gaussian', 'marshak', 'hohlraum'}
    scale : {'benchmark', 'desk'}
        Full benchmark resolution or the small preset used for testing.
    """
    table = {"benchmark": BENCHMARK, "desk": DESK}.get(scale)
    if table is None:
        raise ValueError(f"unknown scale {scale!r}")
    if name not in table:
        raise ValueError(f"unknown scenario {name!r}")
    res = table[name]
    if name in ("gaussian", "marshak"):
        domain = (0.0, 0.002, 0.0, 0.002)
        cold = WallSpec(rho=0.0, T_B=0.02)
        if name == "gaussian":
            walls = {w: cold for w in ("left", "right", "bottom", "top")}
            T_init = gaussian_temperature
        else:
            walls = {"left": WallSpec(rho=0.0, T_B=80.0), "right": cold, "bottom": cold, "top": cold}
            def T_init(pts):
                return np.full(len(pts), 0.02)
        return Scenario(
            name=name, domain=domain, n_x=res["n"], n_y=res["n"], quad_order=res["q"],
            eps=1.0, t_end=res["t_end"], a=A_ERG_CM3_EV4, c=C_CM_PER_PS,
            materials=_uniform_material(SIGMA_A_GAUSS, RHO_CV_EV), T_init=T_init,
            boundary=BoundarySpec(walls),
            units={"length": "cm", "time": "ps", "temperature": "eV", "energy": "erg"},
            assert_mode="strict" if name == "gaussian" else "monitor",
        )
    walls = {
        "left": WallSpec(rho=0.0, T_B=1.0),
        "right": WallSpec(rho=0.0, T_B=1e-3),
        "bottom": WallSpec(rho=1.0, T_B=1e-3),
        "top": WallSpec(rho=1.0, T_B=1e-3),
    }
    def T_init(pts):
        return np.full(len(pts), 1e-3)
    return Scenario(
        name=name, domain=(0.0, 1.0, 0.0, 1.0), n_x=res["n"], n_y=res["n"], quad_order=res["q"],
        eps=1.0, t_end=res["t_end"], a=0.01372, c=29.98,
        materials=_hohlraum_material, T_init=T_init, boundary=BoundarySpec(walls),
        units={"length": "cm", "time": "ns", "temperature": "keV", "energy": "GJ"},
        allow_vacuum=True, assert_mode="monitor",
    )
