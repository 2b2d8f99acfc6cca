"""
Reference solvers on one instance
=================================

All solvers see the same twelve users on six channels; every result is
re-powered by water-filling before its total rate is reported.
"""

from nomacim import RadioConfig, generate_scenario, run_pipeline
from nomacim.pipeline import METHODS

scen = generate_scenario(RadioConfig(), 12, seed=7)
best = run_pipeline(scen, "es").total_rate
for method in METHODS:
    if method == "oma":
        continue    # needs one channel per user
    r = run_pipeline(scen, method, seed=0)
    print(f"{method:8s} {r.total_rate / 1e6:9.3f} Mbit/s  {r.total_rate / best:7.4f} of ES  "
          f"{r.wall_clock_s * 1e3:8.2f} ms  work {r.work}")
