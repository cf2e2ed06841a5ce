# %% [markdown]
# # Ordinates and staggered lattices
#
# The angular variable lives on the unit sphere projected onto the disc, so
# the weights integrate to 2*pi.  Gauss-Legendre nodes in mu are crossed with
# a midpoint rule in the azimuth.

# %%
import numpy as np

from trtlr import build_grid, build_quadrature

quad = build_quadrature(8)
w, ox, oy = quad.weights, quad.omega_x, quad.omega_y
print(f"{quad.n_dirs} ordinates, sum w = {w.sum():.15f} (2 pi = {2 * np.pi:.15f})")
print(f"<Omega_x^2> = {w @ ox**2:.15f}, 2 pi / 3 = {2 * np.pi / 3:.15f}")
print(f"<Omega_x Omega_y> = {w @ (ox * oy):.1e}")

# %% [markdown]
# Reflections about the walls are permutations of the ordinates.

# %%
l = 5
print("Omega       ", quad.directions[l])
print("x-reflected ", quad.directions[quad.reflect_x[l]])
print("y-reflected ", quad.directions[quad.reflect_y[l]])

# %% [markdown]
# The grid interleaves two lattices on a half-spacing index set.  Centers
# and corners carry T and h, edge midpoints carry g.

# %%
g = build_grid(4, 3)
print(f"centers {g.n_centers}, corners {g.n_C - g.n_centers}, interfaces {g.n_I}")
print(f"dx = {g.dx:.4f}, dy = {g.dy:.4f}; first and last centers sit on the walls:")
print(g.center_points[: g.n_x])
