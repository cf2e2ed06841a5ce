"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import time
from functools import lru_cache

import numpy as np
import pytest

from trtlr.boundary import uniform_walls
from trtlr.diagnostics import cfl_bound, mass, relative_error
from trtlr.full import initial_full_state, step_full
from trtlr.lowrank import TruncationPolicy, dlra_step, initial_lowrank_state
from trtlr.model import make_discretization, uniform_params
from trtlr.quadrature import build_quadrature
from trtlr.runner import run

from conftest import periodic_disc, smooth_T
from property_checks import CHECKS, run_check
from test_boundary import lowrank_boundary_gap
from test_lowrank import dense_oracle_gap, truncation_violation
from test_rosseland import eps_zero_gap

EPS_SWEEP = (1.0, 1e-1, 1e-2, 1e-3, 1e-4)
_TIMES = {}


@lru_cache(maxsize=None)
def gaussian_run(solver, eps=None):
    cfg = {"scenario": "gaussian", "scale": "desk", "solver": solver, "run": {"assert": "monitor"}}
    if eps is not None:
        cfg["physics"] = {"epsilon": eps}
    t0 = time.perf_counter()
    res = run(cfg)
    _TIMES[(solver, eps)] = time.perf_counter() - t0
    return res


def test_criterion_01_discrete_properties(report):
    t0 = time.perf_counter()
    worst = {}
    for name in CHECKS:
        n = 100 if name != "quartic inequality" else 1  # one call checks 1e5 pairs
        worst[name] = run_check(name, n, seed=2024)
    elapsed = time.perf_counter() - t0
    bad = [k for k, v in worst.items() if v > 0]
    ok = not bad and elapsed < 10.0
    report(1, ok, f"{len(CHECKS)} properties x 100 instances, {elapsed:.1f} s, violations: {bad or 'none'}")
    assert ok


def test_criterion_02_quadrature_moments(report):
    worst = 0.0
    for q in range(4, 31, 2):
        quad = build_quadrature(q)
        w, ox, oy = quad.weights, quad.omega_x, quad.omega_y
        errs = [abs(w.sum() - 2 * np.pi), abs(w @ ox), abs(w @ oy), abs(w @ ox**3), abs(w @ oy**3),
                abs(w @ (ox * oy**2)), abs(w @ ox**2 - 2 * np.pi / 3), abs(w @ oy**2 - 2 * np.pi / 3),
                abs(w @ (ox * oy))]
        worst = max(worst, max(errs))
    ok = worst <= 1e-12
    report(2, ok, f"even orders 4-30, max moment error {worst:.2e}")
    assert ok


@pytest.mark.slow
def test_criterion_03_mass_conservation(report):
    drifts = {}
    for eps in (1.0, 1e-2):
        disc = periodic_disc(n=20, order=8, eps=eps, sigma_a=0.0, sigma_s=1.0, allow_vacuum=True)
        T0 = smooth_T(disc, amp=0.5)
        dt = 0.95 * cfl_bound(disc)
        pol = TruncationPolicy()
        for solver in ("full", "dlra"):
            st = initial_full_state(T0, disc) if solver == "full" else initial_lowrank_state(T0, disc)
            m0 = mass(st, disc)
            worst = 0.0
            for _ in range(200):
                st, _ = step_full(st, disc, dt) if solver == "full" else dlra_step(st, disc, dt, pol)
                worst = max(worst, abs(mass(st, disc) - m0) / abs(m0))
            drifts[(solver, eps)] = worst
    ok = max(drifts.values()) <= 1e-10
    detail = ", ".join(f"{s} eps={e:g}: {d:.1e}" for (s, e), d in drifts.items())
    report(3, ok, f"max relative mass drift over 200 steps ({detail})")
    assert ok


@pytest.mark.slow
def test_criterion_04_energy_decay(report):
    worst = {}
    for solver in ("full", "dlra"):
        for eps in (1.0, 1e-4):
            res = gaussian_run(solver, eps)
            e = np.array([r.energy for r in res.records])
            worst[(solver, eps)] = float(np.max(np.diff(e)) / e[0])
            assert res.manifest["dt_nominal"] == pytest.approx(0.95 * res.manifest["cfl_bound"])
    ok = max(worst.values()) <= 1e-12
    detail = ", ".join(f"{s} eps={e:g}: {v:.1e}" for (s, e), v in worst.items())
    report(4, ok, f"max (e[n+1]-e[n])/e[0] ({detail})")
    assert ok


@pytest.mark.slow
def test_criterion_05_asymptotic_preserving_sweep(report):
    t0 = time.perf_counter()
    ref = gaussian_run("rosseland")
    w = ref.disc.grid.weights_C
    lines, ok = [], True
    for solver in ("full", "dlra"):
        errs = [relative_error(gaussian_run(solver, eps).state.T, ref.state.T, w) for eps in EPS_SWEEP]
        mono = all(b <= a for a, b in zip(errs, errs[1:]))
        ratio = errs[-1] / errs[0]
        ok &= mono and ratio <= 1e-2
        lines.append(f"{solver}: " + " ".join(f"{e:.2e}" for e in errs) + f" ratio {ratio:.1e}")
    # runs shared with criterion 4 were timed when first computed
    elapsed = sum(v for k, v in _TIMES.items())
    ok &= elapsed < 300.0
    report(5, ok, f"{'; '.join(lines)}; {elapsed:.0f} s")
    assert ok


def test_criterion_06_eps_zero_limit(report):
    disc = periodic_disc(n=20, order=8, eps=0.0, sigma_a=1.0, sigma_s=0.5, cv=0.8)
    T = smooth_T(disc)
    st = initial_lowrank_state(T, disc, rank=6, seed=1)
    st.S = np.random.default_rng(0).standard_normal(st.S.shape)
    new, _ = dlra_step(st, disc, 1e-3, TruncationPolicy())
    B = disc.planck(T)
    sig = disc.params.sigma_t_I[:, None]
    lim = -(np.outer(disc.gradient(B, "x"), disc.ang.Q_x) + np.outer(disc.gradient(B, "y"), disc.ang.Q_y)) / sig
    g_err = float(np.abs(new.dense() - lim).max())
    T_err = eps_zero_gap(disc)
    ok = g_err <= 1e-10 and T_err <= 1e-10
    report(6, ok, f"low-rank g vs limit {g_err:.1e}, full vs diffusion step {T_err:.1e}")
    assert ok


def test_criterion_07_dense_oracle(report):
    gaps = [dense_oracle_gap(seed) for seed in range(20)]
    ok = max(gaps) <= 1e-10
    report(7, ok, f"12 interface points, 8 ordinates, 20 instances, max gap {max(gaps):.1e}")
    assert ok


def test_criterion_08_truncation_contract(report):
    worst = max(truncation_violation(seed) for seed in range(40))
    ok = worst <= 0
    report(8, ok, f"40 instances, worst contract violation {worst:.2e} (<= 0 passes)")
    assert ok


@pytest.mark.slow
def test_criterion_09_full_vs_lowrank(report):
    full = run({"scenario": "marshak", "scale": "desk", "solver": "full"})
    lr = run({"scenario": "marshak", "scale": "desk", "solver": "dlra"})
    diff = relative_error(lr.state.T, full.state.T, full.disc.grid.weights_C)
    ranks = [r.rank for r in lr.records[1:]]
    r_max = lr.manifest["config"]["lowrank"]["rank_max"]
    events = lr.flags["truncation_events"]
    ok = diff <= 2e-2 and max(ranks) < r_max and events >= 1
    report(9, ok, f"relative L2 difference {diff:.4f}, ranks {min(ranks)}-{max(ranks)} < {r_max}, "
                  f"{events} truncation events")
    assert ok


def _reflective_drift(solver, eps):
    disc = make_discretization(
        20, 20, 8, periodic=False,
        params=lambda g: uniform_params(g, a=1.0, c=1.0, eps=eps, sigma_a=0.0, sigma_s=1.0, allow_vacuum=True),
        boundary=uniform_walls(1.0, 1.0))
    x, y = disc.grid.center_points.T
    T0 = 1 + np.exp(-((x - 0.3) ** 2 + (y - 0.6) ** 2) / 0.02)
    dt = 0.95 * cfl_bound(disc)
    st = initial_full_state(T0, disc) if solver == "full" else initial_lowrank_state(T0, disc)
    m0 = mass(st, disc)
    for _ in range(100):
        st, _ = step_full(st, disc, dt) if solver == "full" else dlra_step(st, disc, dt, TruncationPolicy())
    return abs(mass(st, disc) - m0) / m0


@pytest.mark.slow
def test_criterion_10_boundary_behaviour(report):
    drift = {eps: _reflective_drift("full", eps) for eps in (1.0, 1e-2)}
    lr_drift = {eps: _reflective_drift("dlra", eps) for eps in (1.0, 1e-2)}
    gap = max(lowrank_boundary_gap(seed, rho=0.0, n=20, r=10, order=8) for seed in range(3))
    ok = max(drift.values()) <= 1e-8 and gap <= 1e-10
    report(10, ok, f"reflective mass drift {max(drift.values()):.1e}; projected inflow rows gap {gap:.1e}; "
                   f"(low-rank drift for reference: {max(lr_drift.values()):.1e})")
    assert ok
