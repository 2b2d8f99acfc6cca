"""
Rate versus transmit power
==========================

A small sweep: five trials per point on common random numbers, so the
curve is smooth even with few trials.
"""

import numpy as np

from nomacim import sweep

rows = sweep("power", (2.0, 6.0, 12.0), trials=5, methods=("cim", "cnoma", "random"))
table = {}
for r in rows:
    table.setdefault((r.value, r.method), []).append(r.total_rate)
for (p, m), v in sorted(table.items()):
    print(f"P_T={p:5.1f} W  {m:7s} {np.mean(v) / 1e6:9.3f} Mbit/s")
