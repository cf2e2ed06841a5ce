# %% [markdown]
# # Shrinking epsilon: convergence to the Rosseland diffusion scheme
#
# The hot spot problem is run for decreasing Knudsen numbers and compared
# with the explicit diffusion scheme on the same grid.  The error should fall
# linearly in epsilon once epsilon is small.  A short end time keeps this
# demo quick.

# %%
from trtlr import relative_error, run

base = {"scenario": "gaussian", "time": {"t_end": 0.1}}
ref = run(dict(base, solver="rosseland"))
w = ref.disc.grid.weights_C
for eps in (1.0, 1e-1, 1e-2, 1e-3):
    res = run(dict(base, solver="dlra", physics={"epsilon": eps}))
    err = relative_error(res.state.T, ref.state.T, w)
    print(f"eps = {eps:7.0e}   error vs diffusion {err:.3e}   final rank {res.state.rank}")
