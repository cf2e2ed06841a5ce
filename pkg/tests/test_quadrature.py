import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from trtlr.quadrature import angular_ops, build_quadrature


@pytest.mark.parametrize("order", range(4, 31, 2))
def test_moments(order):
    q = build_quadrature(order)
    w, ox, oy = q.weights, q.omega_x, q.omega_y
    assert q.n_dirs == 2 * order**2
    assert abs(w.sum() - 2 * np.pi) <= 1e-12
    for m in (ox, oy, ox**3, oy**3, ox * oy**2):
        assert abs(w @ m) <= 1e-12
    assert abs(w @ ox**2 - 2 * np.pi / 3) <= 1e-12
    assert abs(w @ oy**2 - 2 * np.pi / 3) <= 1e-12
    assert abs(w @ (ox * oy)) <= 1e-12


def test_order_30_count():
    q = build_quadrature(30)
    assert q.n_dirs == 1800
    assert q.weights.sum() == pytest.approx(2 * np.pi, abs=1e-12)


def test_order2_odd_moment_vanishes():
    q = build_quadrature(2)
    assert abs(q.weights @ q.omega_x) <= 1e-15


def test_second_moment_against_adaptive_integration():
    # integrate Omega_x^2 over the projected sphere: (mu, theta) in [0,1] x [0, 2pi]
    ref, _ = integrate.dblquad(lambda th, mu: (1 - mu**2) * np.sin(th) ** 2, 0, 1, 0, 2 * np.pi,
                               epsabs=1e-13, epsrel=1e-13)
    q = build_quadrature(8)
    assert abs(q.weights @ q.omega_x**2 - ref) <= 1e-12


@pytest.mark.parametrize("order", [3, 1, 0, 2.5])
def test_bad_orders(order):
    with pytest.raises(ValueError):
        build_quadrature(order)


@pytest.mark.parametrize("order", [2, 4, 8, 16])
def test_reflections(order):
    q = build_quadrature(order)
    d = q.directions
    ident = np.arange(q.n_dirs)
    for perm, comp in ((q.reflect_x, 0), (q.reflect_y, 1)):
        assert np.array_equal(perm[perm], ident)
        assert np.allclose(d[perm, comp], -d[:, comp], atol=1e-15)
        assert np.allclose(d[perm, 1 - comp], d[:, 1 - comp], atol=1e-15)
        assert np.array_equal(q.weights[perm], q.weights)
    assert np.array_equal(q.reflect((1, 0)), q.reflect_x)
    assert np.array_equal(q.reflect((0, -1)), q.reflect_y)
    with pytest.raises(ValueError):
        q.reflect((1, 1))


def test_reflection_formula_example():
    # Omega' = Omega - 2 n (n . Omega) with n = (1, 0)
    q = build_quadrature(4)
    n = np.array([1.0, 0.0])
    d = q.directions
    refl = d - 2 * np.outer(d @ n, n)
    assert np.allclose(d[q.reflect_x], refl, atol=1e-15)


def test_sign_split():
    q = build_quadrature(6)
    a = angular_ops(q)
    for v in ("x", "y"):
        assert np.array_equal(a.Qplus(v) + a.Qminus(v), a.Q(v))
        assert np.array_equal(a.Qplus(v) - a.Qminus(v), a.absQ(v))
        assert np.all(a.Qplus(v) * a.w * a.Qminus(v) == 0)
        assert np.all(a.Qplus(v) >= 0) and np.all(a.Qminus(v) <= 0)
    assert np.allclose(a.M**2 * a.ones, a.w, rtol=1e-15, atol=0)
    k = int(np.argmin(a.Q_x))
    assert a.Qplus_x[k] == 0 and a.Qminus_x[k] == a.Q_x[k]


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.sampled_from([2, 4, 8]), axis=st.sampled_from("xy"))
def test_flux_moment_inequality(seed, order, axis):
    """(phi^T Q w)^2 <= pi phi^T |Q| M^2 phi."""
    a = angular_ops(build_quadrature(order))
    phi = np.random.default_rng(seed).standard_normal(a.w.size)
    lhs = (phi @ (a.Q(axis) * a.w)) ** 2
    rhs = np.pi * phi @ (a.absQ(axis) * a.w * phi)
    assert lhs <= rhs * (1 + 1e-10) + 1e-10
