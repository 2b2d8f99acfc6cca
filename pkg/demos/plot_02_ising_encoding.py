"""
Channel assignment as an Ising problem
======================================

The assignment is written as a quadratic energy over binary neurons: a
throughput reward for users sharing a channel plus penalties that force
each entity onto one channel and two entities onto each channel. The
Ising form follows from ``sigma = 2x - 1``.
"""

import numpy as np

from nomacim import RadioConfig, build_rate_table, compute_cnr, generate_scenario
from nomacim.encoding import decode, encode, ising_energy, nn_energy
from nomacim.exhaustive import exhaustive_search

cfg = RadioConfig(num_channels=2)
table = build_rate_table(compute_cnr(generate_scenario(cfg, 4, seed=3)), np.ones(2), cfg)
terms, weights, problem = encode(table)
print("spins:", problem.num_spins, " scaling:", weights.scaling)

###############################################################################
# Scan all 2^8 spin states and decode the lowest-energy one.
n = problem.num_spins
sig = 2.0 * ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1) - 1.0
E = np.array([ising_energy(s, problem) for s in sig])
ground = decode(sig[E.argmin()], table)
print("ground state pairs:", ground.assignment.pairs(), "feasible:", ground.feasible)
print("exhaustive optimum:", exhaustive_search(table).assignment.pairs())

###############################################################################
# The two energies differ by a constant.
x = (sig[5] + 1) / 2
print("offset:", ising_energy(sig[5], problem) - 2 * nn_energy(x, weights),
      "=", 0.25 * weights.w.sum() - weights.theta.sum())
