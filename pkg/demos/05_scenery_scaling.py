"""
Random walk in random scenery: n^(3/4) scaling
==============================================

Z_n adds up the orientations seen by the vertical walk.  Its spread
grows like n^(3/4), against n^(1/2) for the walk itself.
"""

from orientwalk.experiments import ExperimentConfig, run

report, data = run(ExperimentConfig("scaling", n_grid=[2**k for k in range(10, 17)], replicas=200, seed=5))
for line in data["scaling.csv"]:
    print(line)
z, y = report.metrics["Z_slope"], report.metrics["Y_slope"]
print(f"slope for Z: {z['slope']:.3f} +- {z['stderr']:.3f}")
print(f"slope for Y: {y['slope']:.3f} +- {y['stderr']:.3f}")
