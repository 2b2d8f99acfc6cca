"""
Stale decisions on a Manhattan grid
===================================

Vehicles drive along the streets of a grid. A solver that takes longer
than a decision interval applies its answer to a channel that has moved
on; the same CIM scored at 5 ms and 40 ms shows the cost of delay.
"""

import numpy as np

from nomacim import RadioConfig, run_pipeline
from nomacim.mobility import MobilityConfig, TimedSolver, dynamic_eval


def cim(scen):
    return run_pipeline(scen, "cim").assignment


def es(scen):
    return run_pipeline(scen, "es").assignment


radio = RadioConfig(num_channels=4)
recs = dynamic_eval([TimedSolver("5 ms", 0.005, cim), TimedSolver("40 ms", 0.040, cim)],
                    MobilityConfig(num_intervals=30), radio, 8, es)
for name in ("5 ms", "40 ms"):
    print(name, "mean ratio to the fresh optimum:",
          round(float(np.mean([r.ratio for r in recs if r.solver == name])), 4))
