"""
Simulated coherent Ising machine
================================

Each spin is the in-phase amplitude of a parametric oscillator. As the
pump is ramped through threshold the amplitudes bifurcate, and the
measurement feedback steers the signs toward a low-energy configuration.
"""

import numpy as np

from nomacim import CimConfig, RadioConfig, build_rate_table, compute_cnr, generate_scenario
from nomacim.encoding import decode, encode
from nomacim.cim import simulate

cfg = RadioConfig()
scen = generate_scenario(cfg, 12, seed=1000)
table = build_rate_table(compute_cnr(scen), np.ones(cfg.num_channels), cfg)
_, _, problem = encode(table)

spins, trace = simulate(problem, CimConfig())
for t in (0, 250, 500, 750, 1000):
    c = trace.amplitudes[t]
    print(f"cycle {t:4d}  pump {trace.pump[min(t, len(trace.pump) - 1)]:.3f}  "
          f"mean |c| {np.abs(c).mean():.3f}  energy {trace.energy[t]:.3f}")

dec = decode(spins, table)
print("decoded pairs:", dec.assignment.pairs(), "repaired:", dec.repaired)
