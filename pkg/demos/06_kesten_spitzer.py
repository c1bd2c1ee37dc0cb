"""
The self-similar limit process
==============================

Delta_t integrates the local time of a Brownian motion against two
independent white noises.  It is simulated here without any reference to
the lattice: Euler steps for the Brownian path, an occupation histogram
for its local time, Gaussian cell noise.  Var(Delta_1) = 8/(3 sqrt(2 pi))
and the variance scales like t^(3/2).
"""

import numpy as np

from orientwalk.scenery import DELTA_VAR_1, FLT_CONSTANT, delta_samples, normalized_endpoint
from orientwalk.stats import ks_two_sample
from orientwalk.rng import derive_seed, make_rng

rng = make_rng(0, "demo-delta")
d1 = delta_samples(1.0, 2000, rng)
d4 = delta_samples(4.0, 2000, rng)
print(f"Var(Delta_1) = {d1.var():.4f} (exact {DELTA_VAR_1:.4f})")
print(f"Var(Delta_4) / Var(Delta_1) = {d4.var() / d1.var():.2f} (exact 8)")

# %%
# The lattice walk's first coordinate after n steps, scaled by n^(3/4),
# is close in law to FLT_CONSTANT * Delta_1.
n = 2**16
x = np.array([normalized_endpoint(n, "horizontal", derive_seed(1, "demo", r)) for r in range(500)])
print(f"KS distance to {FLT_CONSTANT:.6f} * Delta_1: {ks_two_sample(x, FLT_CONSTANT * d1[:500]).statistic:.3f}")
