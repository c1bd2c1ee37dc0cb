"""
Checking the integrability condition
====================================

The walk is transient when the integral of 1/sqrt(f(1-f)) against the
invariant measure is finite.  A Monte Carlo estimate cannot prove
finiteness, so the integrand is clipped at growing caps: a plateau means
admissible, steady growth means diverging.
"""

from orientwalk import admissibility, make_system
from orientwalk.rng import make_rng

rng = make_rng(0, "demo-admissibility")
for system, f in [("identity", "const:0.5"),
                  ("rotation:alpha=0.618034", "f1"),
                  ("rotation:alpha=0.618034", "f2"),
                  ("mp:alpha=0.25,burnin=2000", "fmp")]:
    res = admissibility(make_system(system, f), sample_schedule=(10**4, 10**5, 10**6), rng=rng)
    last = [row for row in res.table if row["samples"] == res.sample_counts[-1]]
    trail = "  ".join(f"cap {row['cap']:.0e}: {row['estimate']:.4f}" for row in last)
    print(f"{f:>10} on {system:<26} {res.verdict:<12} {trail}")

# f1(x) = x gives pi; cos^2(2 pi x) vanishes quadratically at x = 1/4 and
# the clipped integral grows like log(cap).
