# %% [markdown]
# # Hohlraum on the desk grid
#
# The left wall radiates at 1 keV into a cavity with absorbing walls and a
# central capsule.  Vacuum cells get a huge heat capacity so their
# temperature is frozen, which also makes the material part of the energy
# enormous; the energy column is therefore dominated by those cells.
# The scalar flux can dip below zero in the vacuum ahead of the front,
# which the radiation temperature clamps with a warning.
# Output files go to ``hohlraum_out/``.

# %%
import numpy as np

from trtlr import radiation_temperature, run

res = run({"scenario": "hohlraum", "solver": "dlra", "output": {"dump_every": 60}},
          out="hohlraum_out")
print(res.manifest["status"], res.manifest["steps"], "steps, flags:", res.flags)

# %%
g = res.disc.grid
Trad = g.centers_view(radiation_temperature(res.state, res.disc))
print("radiation temperature [keV] on every fourth row and column:")
print(np.array2string(Trad[::4, ::4], precision=3))
print("rank history (every 20 steps):", [r.rank for r in res.records[::20]])
