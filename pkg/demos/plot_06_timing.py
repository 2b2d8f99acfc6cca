"""
Solver work versus problem size
===============================

The CIM runs a fixed number of cycles whatever the size; annealing needs
more sweeps and exhaustive search visits (2N_c)!/2^N_c states.
"""

from nomacim import timing_bench

for r in timing_bench((6, 8, 10, 12), ("cim", "sa", "es")):
    print(f"N_u={r.num_users:2d} {r.method:4s} {r.work:>10d} {r.work_unit:7s} "
          f"{r.wall_clock_s:.4f} s")
