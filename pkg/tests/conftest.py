import numpy as np
import pytest

from trtlr.boundary import uniform_walls
from trtlr.model import make_discretization, uniform_params


def periodic_disc(n=6, order=4, eps=1.0, sigma_a=1.0, sigma_s=0.0, a=1.0, c=1.0, cv=1.0,
                  allow_vacuum=False, domain=(0.0, 1.0, 0.0, 1.0), n_y=None):
    return make_discretization(
        n, n if n_y is None else n_y, order, domain, periodic=True,
        params=lambda g: uniform_params(g, a=a, c=c, eps=eps, sigma_a=sigma_a, sigma_s=sigma_s,
                                        cv=cv, allow_vacuum=allow_vacuum))


def walled_disc(n=6, order=4, eps=1.0, sigma_a=1.0, sigma_s=0.0, rho=0.0, T_B=1.0, a=1.0, c=1.0,
                cv=1.0, allow_vacuum=False, boundary="uniform"):
    bnd = uniform_walls(rho, T_B) if boundary == "uniform" else boundary
    return make_discretization(
        n, n, order, (0.0, 1.0, 0.0, 1.0), periodic=False,
        params=lambda g: uniform_params(g, a=a, c=c, eps=eps, sigma_a=sigma_a, sigma_s=sigma_s,
                                        cv=cv, allow_vacuum=allow_vacuum),
        boundary=bnd)


def smooth_T(disc, base=1.0, amp=0.3):
    x, y = disc.grid.center_points.T
    return base + amp * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y) + 0.1 * amp * np.cos(4 * np.pi * x)


def mean_free(G, w):
    """Remove the w-mean of every row."""
    return G - np.outer(G @ w, np.ones(w.size)) / w.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line; the lines are repeated in the terminal summary."""
    def _report(criterion, ok, detail):
        line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
