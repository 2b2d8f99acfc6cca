"""End-to-end resource allocation and the experiment drivers.

A solve runs: CNR -> rate table at unit channel power -> (Ising encoding)
-> solver -> decode/repair -> water-filling on the chosen assignment ->
final per-user rates.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .assignment import Assignment
from .baselines import (SaConfig, cnoma_solve, hopfield_run, oma_solve, random_solve,
                        sa_solve)
from .cim import CimConfig, simulate
from .config import RadioConfig, format_float
from .encoding import DEFAULT_SCALING, Decoded, decode, encode
from .errors import InfeasibleQoS, ProblemTooLarge
from .exhaustive import MAX_ES_CHANNELS, exhaustive_search
from .radio import (CnrMatrix, RateTable, Scenario, allocate_power, build_rate_table,
                    compute_cnr, generate_scenario)

__all__ = [
    "METHODS",
    "ISING_METHODS",
    "SA_SWEEP_SCHEDULE",
    "ES_MAX_USERS",
    "SWEEP_KINDS",
    "MethodOptions",
    "SolveResult",
    "SweepRow",
    "TimingRow",
    "run_pipeline",
    "spin_scorer",
    "trial_seed",
    "sweep_points",
    "sweep",
    "timing_bench",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_timing_csv",
    "read_timing_csv",
    "SWEEP_COLUMNS",
    "TIMING_COLUMNS",
]

METHODS = ("cim", "hopfield", "sa", "cnoma", "es", "random", "oma")
ISING_METHODS = ("cim", "hopfield", "sa")

# SA sweeps per user count for the timing benchmark
SA_SWEEP_SCHEDULE = {6: 10, 8: 50, 10: 100, 12: 500, 14: 1000, 16: 5000, 18: 10000}
ES_MAX_USERS = 14
# candidates re-scored with water-filled power when picking the ES answer
ES_REPOWER_TOP_K = 64


@dataclass(frozen=True)
class MethodOptions:
    cim: CimConfig = field(default_factory=CimConfig)
    sa: SaConfig = field(default_factory=SaConfig)
    scaling: tuple = DEFAULT_SCALING
    es_top_k: int = ES_REPOWER_TOP_K


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of one allocation.

    ``feasible`` tells whether the solver's raw output already met the
    assignment constraints; ``repaired`` whether decode had to fix it. The
    returned assignment is feasible either way. ``work`` counts solver
    effort: CIM cycles, SA or Hopfield sweeps, ES states.
    """

    method: str
    assignment: Assignment
    per_user_rates: np.ndarray
    total_rate: float
    power: np.ndarray
    feasible: bool
    repaired: bool
    wall_clock_s: float
    seed: int
    work: int = 0
    energy_trace: np.ndarray | None = None


def _es_choice(rate_table: RateTable, cnr: CnrMatrix, config: RadioConfig, top_k: int):
    res = exhaustive_search(rate_table, top_k=top_k)
    best, best_rate = None, -math.inf
    for _, cand in res.candidates:
        try:
            rate = allocate_power(cand, cnr, config).total_rate
        except InfeasibleQoS:
            continue
        if rate > best_rate:
            best, best_rate = cand, rate
    if best is None:
        raise InfeasibleQoS("no enumerated assignment meets the rate floors")
    return best, res.num_states


def run_pipeline(scenario: Scenario, method: str, options: MethodOptions | None = None,
                 seed: int = 0) -> SolveResult:
    """Allocate channels and power for ``scenario`` with ``method``.

    ``seed`` drives every stochastic solver (it replaces the seed in the
    CIM and SA configs). The wall clock covers encoding, solving and
    decoding, not scenario set-up or the final water-filling.

    Raises
    ------
    InfeasibleQoS, ProblemTooLarge, NumericalDivergence
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    opts = MethodOptions() if options is None else options
    cfg = scenario.config
    cnr = compute_cnr(scenario)
    nc = cfg.num_channels
    n = 2 * nc
    table = build_rate_table(cnr, np.ones(nc), cfg)
    trace = None
    work = 0

    t0 = time.perf_counter()
    if method in ISING_METHODS:
        _, weights, problem = encode(table, opts.scaling)
        if method == "cim":
            spins, tr = simulate(problem, opts.cim.replace(seed=seed))
            dec = decode(spins, table)
            trace, work = tr.energy, opts.cim.num_cycles
        elif method == "hopfield":
            run = hopfield_run(weights, seed)
            dec = decode(2 * run.x - 1, table)
            work = run.sweeps
        else:
            sa = SaConfig(opts.sa.t_initial, opts.sa.num_sweeps, seed)
            dec = sa_solve(weights, table, sa)
            work = sa.num_sweeps
    elif method == "es":
        if nc > MAX_ES_CHANNELS:
            raise ProblemTooLarge(f"exhaustive search is limited to {MAX_ES_CHANNELS} channels")
        best, work = _es_choice(table, cnr, cfg, opts.es_top_k)
        dec = Decoded(best, True, False)
    elif method == "cnoma":
        dec = Decoded(cnoma_solve(cnr, cfg), True, False)
    elif method == "oma":
        dec = Decoded(oma_solve(cnr, cfg), True, False)
    else:
        dec = Decoded(random_solve(n, nc, seed), True, False)
    elapsed = time.perf_counter() - t0

    dec.assignment.validate()
    alloc = allocate_power(dec.assignment, cnr, cfg)
    return SolveResult(method, dec.assignment, alloc.per_user_rates, alloc.total_rate,
                       alloc.q, dec.feasible, dec.repaired, elapsed, seed, work, trace)


def spin_scorer(rate_table: RateTable, cnr: CnrMatrix, config: RadioConfig
                ) -> Callable[[np.ndarray], float]:
    """Spins -> total rate after decode, repair and water-filling."""
    def score(spins):
        return allocate_power(decode(spins, rate_table).assignment, cnr, config).total_rate
    return score


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed for one trial, shared by every sweep point and method so that
    points are compared on common random numbers."""
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


# ---------------------------------------------------------------- sweeps

SWEEP_KINDS = ("users", "power", "channels", "users_fixed")
_DEFAULT_POINTS = {
    "users": (12, 14, 16, 18, 20),
    "power": (2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
    "channels": (6, 7, 8, 9, 10),
    "users_fixed": (5, 6, 7, 8, 9, 10),
}


def sweep_points(kind: str, values: Iterable | None = None,
                 radio: RadioConfig = RadioConfig()) -> list:
    """``[(value, config, num_users)]`` for a sweep.

    users: ``N_c = ceil(N_u / 2)``; power: ``N_u = 12, N_c = 6``;
    channels: ``N_u = 12``; users_fixed: ``N_c = 5``.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep {kind!r}; choose from {', '.join(SWEEP_KINDS)}")
    vals = _DEFAULT_POINTS[kind] if values is None else tuple(values)
    out = []
    for v in vals:
        if kind == "users":
            nu = int(v)
            cfg = radio.replace(num_channels=math.ceil(nu / 2))
        elif kind == "power":
            nu, cfg = 12, radio.replace(num_channels=6, total_power_w=float(v))
        elif kind == "channels":
            nu, cfg = 12, radio.replace(num_channels=int(v))
        else:
            nu, cfg = int(v), radio.replace(num_channels=5)
        out.append((v, cfg, nu))
    return out


class SweepRow(NamedTuple):
    sweep: str
    value: float
    trial: int
    method: str
    total_rate: float
    wall_clock_s: float
    feasible: bool
    repaired: bool
    status: str        # ok | skipped | infeasible_qos


SWEEP_COLUMNS = SweepRow._fields


def _sweep_task(args):
    kind, value, cfg, nu, trial, seed, methods, options = args
    rows = []
    scen = generate_scenario(cfg, nu, seed)
    for m in methods:
        if m == "es" and cfg.num_channels > MAX_ES_CHANNELS:
            rows.append(SweepRow(kind, float(value), trial, m, math.nan, math.nan,
                                 False, False, "skipped"))
            continue
        # orthogonal access needs a channel per user: same users, more channels
        sc = scen
        if m == "oma" and cfg.num_channels < nu:
            sc = generate_scenario(cfg.replace(num_channels=nu), nu, seed)
        try:
            r = run_pipeline(sc, m, options, seed)
        except InfeasibleQoS:
            rows.append(SweepRow(kind, float(value), trial, m, math.nan, math.nan,
                                 False, False, "infeasible_qos"))
            continue
        rows.append(SweepRow(kind, float(value), trial, m, r.total_rate, r.wall_clock_s,
                             r.feasible, r.repaired, "ok"))
    return rows


def sweep(kind: str, values: Iterable | None = None, trials: int = 50,
          methods: Sequence[str] = ("cim", "sa", "cnoma", "random"), seed: int = 0,
          radio: RadioConfig = RadioConfig(), options: MethodOptions | None = None,
          workers: int = 1) -> list:
    """Run every method on ``trials`` scenarios per sweep point.

    ES rows above the enumeration bound carry ``status="skipped"``. Rows
    come back ordered by (point, trial, method) whatever ``workers`` is.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    tasks = [(kind, v, cfg, nu, t, trial_seed(seed, t), tuple(methods), options)
             for v, cfg, nu in sweep_points(kind, values, radio) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            chunks = list(ex.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_sweep_csv(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [SweepRow(d["sweep"], float(d["value"]), int(d["trial"]), d["method"],
                         float(d["total_rate"]), float(d["wall_clock_s"]),
                         d["feasible"] == "1", d["repaired"] == "1", d["status"])
                for d in rd]


# ---------------------------------------------------------------- timing

class TimingRow(NamedTuple):
    num_users: int
    method: str
    wall_clock_s: float
    work: int
    work_unit: str
    status: str        # ok | skipped


TIMING_COLUMNS = TimingRow._fields
_UNITS = {"cim": "cycles", "sa": "sweeps", "es": "states", "hopfield": "sweeps"}


def timing_bench(user_counts: Iterable[int] = (6, 8, 10, 12, 14, 16, 18),
                 methods: Sequence[str] = ("cim", "sa", "es"), seed: int = 0,
                 radio: RadioConfig = RadioConfig(),
                 options: MethodOptions | None = None) -> list:
    """Solver cost versus problem size (``N_c = N_u / 2``).

    SA runs the per-size sweep count of ``SA_SWEEP_SCHEDULE``; ES is skipped
    above ``ES_MAX_USERS`` users; the CIM always runs its configured cycles.
    """
    opts = MethodOptions() if options is None else options
    # compile the numba kernels before anything is timed
    warm = generate_scenario(radio.replace(num_channels=4), 4, seed)
    for m in methods:
        run_pipeline(warm, m, opts, seed)
    rows = []
    for nu in user_counts:
        if nu not in SA_SWEEP_SCHEDULE:
            raise ValueError(f"user count {nu} not in {sorted(SA_SWEEP_SCHEDULE)}")
        cfg = radio.replace(num_channels=math.ceil(nu / 2))
        scen = generate_scenario(cfg, nu, seed)
        for m in methods:
            unit = _UNITS.get(m, "")
            if m == "es" and nu > ES_MAX_USERS:
                rows.append(TimingRow(nu, m, math.nan, 0, unit, "skipped"))
                continue
            o = opts
            if m == "sa":
                o = MethodOptions(opts.cim, SaConfig(opts.sa.t_initial, SA_SWEEP_SCHEDULE[nu]),
                                  opts.scaling, opts.es_top_k)
            r = run_pipeline(scen, m, o, seed)
            rows.append(TimingRow(nu, m, r.wall_clock_s, r.work, unit, "ok"))
    return rows


def write_timing_csv(rows: Sequence[TimingRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMING_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_timing_csv(path) -> list:
    with open(path, newline="") as fh:
        return [TimingRow(int(d["num_users"]), d["method"], float(d["wall_clock_s"]),
                          int(d["work"]), d["work_unit"], d["status"])
                for d in csv.DictReader(fh)]
