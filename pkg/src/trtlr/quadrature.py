"""Product quadrature on the projected unit sphere.

In 2D slab geometry the sphere is collapsed onto the unit disc, so the
angular measure integrates to 2*pi instead of 4*pi.  Directions are
parametrised by mu in [0, 1] (Gauss-Legendre) and an azimuth theta on a
uniform midpoint grid.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Quadrature:
    """Discrete ordinates on the projected sphere.

    Attributes
    ----------
    order : int
        Quadrature order q. There are q polar nodes and 2q azimuthal nodes.
    directions : ndarray, shape (n_dirs, 2)
        Components (Omega_x, Omega_y) of each ordinate.
    weights : ndarray, shape (n_dirs,)
        Positive weights summing to 2*pi.
    reflect_x, reflect_y : ndarray of int
        Permutations mapping ordinate l to the ordinate with Omega_x
        (respectively Omega_y) negated.
    """

    order: int
    directions: np.ndarray
    weights: np.ndarray
    reflect_x: np.ndarray
    reflect_y: np.ndarray

    @property
    def n_dirs(self):
        return self.weights.size

    @property
    def omega_x(self):
        return self.directions[:, 0]

    @property
    def omega_y(self):
        return self.directions[:, 1]

    def reflect(self, normal):
        """Permutation for the specular reflection about a wall with
        axis-aligned outward ``normal``."""
        nx, ny = normal
        if nx != 0 and ny == 0:
            return self.reflect_x
        if ny != 0 and nx == 0:
            return self.reflect_y
        raise ValueError(f"normal {normal} is not axis aligned")


def build_quadrature(order):
    """Tensorised Gauss-Legendre x midpoint-azimuth product rule.

    Parameters
    ----------
    order : int
        Even integer q >= 2.

    Returns
    -------
    Quadrature
        ``2 * order**2`` ordinates ordered with the polar index outermost.
    """
    if int(order) != order or order < 2 or order % 2:
        raise ValueError(f"quadrature order must be an even integer >= 2, got {order}")
    order = int(order)
    x, wx = np.polynomial.legendre.leggauss(order)
    mu = 0.5 * (x + 1.0)
    wmu = 0.5 * wx
    n_theta = 2 * order
    dtheta = 2.0 * np.pi / n_theta
    theta = (np.arange(n_theta) + 0.5) * dtheta

    s = np.sqrt(1.0 - mu**2)
    ox = np.outer(s, np.sin(theta)).ravel()
    oy = np.outer(s, np.cos(theta)).ravel()
    weights = np.outer(wmu, np.full(n_theta, dtheta)).ravel()
    # rescale so the rule is exact for constants to the last bit
    weights *= 2.0 * np.pi / weights.sum()

    # theta -> 2pi - theta flips sin, theta -> pi - theta flips cos
    k = np.arange(n_theta)
    kx = n_theta - 1 - k
    ky = (order - 1 - k) % n_theta
    m = np.arange(order)[:, None] * n_theta
    reflect_x = (m + kx[None, :]).ravel()
    reflect_y = (m + ky[None, :]).ravel()

    directions = np.column_stack([ox, oy])
    for perm, comp in ((reflect_x, 0), (reflect_y, 1)):
        other = 1 - comp
        ok = (np.allclose(directions[perm, comp], -directions[:, comp], atol=1e-14)
              and np.allclose(directions[perm, other], directions[:, other], atol=1e-14)
              and np.array_equal(perm[perm], np.arange(perm.size)))
        if not ok:
            raise RuntimeError("reflection permutation does not close on the nodes")
    for arr in (directions, weights, reflect_x, reflect_y):
        arr.setflags(write=False)
    return Quadrature(order, directions, weights, reflect_x, reflect_y)


@dataclass(frozen=True)
class AngularOps:
    """Diagonal angular operators, stored as 1D arrays of their diagonals."""

    Q_x: np.ndarray
    Q_y: np.ndarray
    absQ_x: np.ndarray
    absQ_y: np.ndarray
    Qplus_x: np.ndarray
    Qplus_y: np.ndarray
    Qminus_x: np.ndarray
    Qminus_y: np.ndarray
    M: np.ndarray
    ones: np.ndarray
    w: np.ndarray

    def Q(self, v):
        return self.Q_x if v == "x" else self.Q_y

    def absQ(self, v):
        return self.absQ_x if v == "x" else self.absQ_y

    def Qplus(self, v):
        return self.Qplus_x if v == "x" else self.Qplus_y

    def Qminus(self, v):
        return self.Qminus_x if v == "x" else self.Qminus_y


def angular_ops(quad):
    """Assemble the diagonals of Q_v, |Q_v|, Q_v^+-, M and the weight vector."""
    qx = quad.omega_x.copy()
    qy = quad.omega_y.copy()
    ax, ay = np.abs(qx), np.abs(qy)
    return AngularOps(
        Q_x=qx, Q_y=qy, absQ_x=ax, absQ_y=ay,
        Qplus_x=0.5 * (qx + ax), Qplus_y=0.5 * (qy + ay),
        Qminus_x=0.5 * (qx - ax), Qminus_y=0.5 * (qy - ay),
        M=np.sqrt(quad.weights), ones=np.ones(quad.n_dirs),
        w=quad.weights.copy(),
    )
