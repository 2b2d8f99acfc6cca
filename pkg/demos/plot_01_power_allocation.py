"""
Power allocation for a paired downlink
======================================

Two users share a channel. The weak user gets just enough power to reach
its rate floor and the strong user takes the rest; across channels the
budget is water-filled above each channel's floor.
"""

import numpy as np

from nomacim import Assignment, RadioConfig, compute_cnr, generate_scenario
from nomacim.power import channel_qos_floor, pair_power_split
from nomacim.radio import allocate_power

cfg = RadioConfig()
A = cfg.qos_factor

###############################################################################
# One channel: split a unit of power between a strong and a weak user.
split = pair_power_split(5e3, 4e2, 1.0, A)
print("strong / weak power:", split)
print("floor for this pair:", channel_qos_floor(5e3, 4e2, A))

###############################################################################
# A whole cell: six channels, twelve users, random pairing.
scen = generate_scenario(cfg, 12, seed=1)
cnr = compute_cnr(scen)
pairing = Assignment.from_pairs([(0, 1), (2, 3), (4, 5), (6, 7), (8, 9), (10, 11)])
alloc = allocate_power(pairing, cnr, cfg)
print("per-channel power:", np.round(alloc.q, 4), "sum", alloc.q.sum())
print("per-user rate (Mbit/s):", np.round(alloc.per_user_rates / 1e6, 3))
print("rate floor (Mbit/s):", cfg.min_rate_bps / 1e6)
