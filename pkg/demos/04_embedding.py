"""
The vertical walk and its horizontal excursions
===============================================

The lattice walk is a simple walk Y on the levels plus, on each visit
of a level, a geometric number (mean 1/2) of horizontal steps along that
level's direction.  Rebuilding the full path from these pieces puts the
walk at (X_n, Y_n) exactly at time T_n.
"""

import numpy as np

from orientwalk import OrientationField, embed, make_system, reconstruct_full_walk, vertical_walk
from orientwalk.rng import make_rng

rng = make_rng(0, "demo-embedding")
field = OrientationField(make_system("bernoulli"), seed=11)
path = vertical_walk(10_000, rng)
dec = embed(path, field, rng)
full = reconstruct_full_walk(dec, field)

at = full.positions[dec.T]
print("M_{T_n} == (X_n, Y_n) for every n:",
      bool(np.array_equal(at[:, 0], dec.X) and np.array_equal(at[:, 1], path.positions)))
print(f"n = {dec.n}, T_n = {dec.T[-1]}, T_n / n = {dec.T[-1] / dec.n:.4f} (limit 1.5)")
print(f"X_n = {dec.X[-1]}, Y_n = {path.positions[-1]}")

# %%
# The local-time profile sums to n + 1.
print("sum of local times:", dec.local_times.total, "max:", dec.local_times.max())
