"""
Recurrent and transient lattices
================================

Count the visits of the walk to the origin.  On the alternating lattice
the count keeps growing (slowly, like log n); with all lines pointing
right, or with i.i.d. directions, it levels off.
"""

from orientwalk.experiments import return_count_curve

grid = [10**3, 10**4, 10**5]
cases = {
    "alternating (rotation 1/2)": dict(system="rotation:alpha=0.5", f="f3", mode="quenched", x=0.25),
    "all right (rotation 0)": dict(system="rotation:alpha=0", f="f3", mode="quenched", x=0.25),
    "i.i.d. annealed": dict(system="bernoulli", f=None),
}
for label, kw in cases.items():
    table, _ = return_count_curve(n_grid=grid, replicas=100, master_seed=1, **kw)
    cells = "  ".join(f"n={row['n']:>6}: {row['mean_returns']:.2f}+-{row['stderr']:.2f}" for row in table)
    print(f"{label:<28} {cells}")
