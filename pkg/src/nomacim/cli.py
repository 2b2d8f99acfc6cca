"""Command-line front end: ``nomacim <command> [options]``.

Exit status: 0 success, 1 usage or other error, 2 rate floors cannot be
met (InfeasibleQoS), 3 exhaustive search too large (ProblemTooLarge),
4 CIM integration diverged.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .baselines import SaConfig
from .cim import CimConfig, write_trace_csv, simulate
from .config import RadioConfig, coerce_fields, format_float, read_key_values
from .encoding import DEFAULT_SCALING, encode
from .errors import InfeasibleQoS, NomaError, NumericalDivergence, ProblemTooLarge
from .mobility import MobilityConfig, TimedSolver, dynamic_eval, write_dynamic_csv
from .pipeline import (METHODS, SWEEP_KINDS, MethodOptions, run_pipeline, sweep,
                       timing_bench, write_sweep_csv, write_timing_csv)
from .radio import build_rate_table, compute_cnr, dump_scenario, generate_scenario, load_scenario

EXIT_OK, EXIT_ERROR, EXIT_QOS, EXIT_TOO_LARGE, EXIT_DIVERGED = 0, 1, 2, 3, 4

SOLVE_COLUMNS = ("method", "total_rate", "wall_clock_s", "feasible", "repaired", "seed",
                 "work", "pairs", "per_user_rates")


class _Parser(argparse.ArgumentParser):
    # keep exit status 2 for infeasible rate floors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _global_options(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    parser.add_argument("--config", type=Path, default=d(None),
                        help="key=value file with radio, CIM and SA settings")
    parser.add_argument("--out", type=Path, default=d(Path(".")),
                        help="output directory (default .)")
    parser.add_argument("--trials", type=int, default=d(50), help="trials per sweep point")
    parser.add_argument("--methods", default=d(None),
                        help=f"comma-separated subset of {','.join(METHODS)}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nomacim", description="NOMA channel assignment with a simulated CIM")
    p.add_argument("--version", action="version", version=__version__)
    _global_options(p, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a scenario file")
    g.add_argument("--users", type=int, default=12)

    s = sub.add_parser("solve", parents=[common], help="solve one scenario")
    s.add_argument("--scenario", type=Path, help="scenario file from 'gen'")
    s.add_argument("--users", type=int, default=12, help="users when generating")

    w = sub.add_parser("sweep", parents=[common], help="rate versus users/power/channels")
    w.add_argument("--kind", choices=SWEEP_KINDS, required=True)
    w.add_argument("--values", help="comma-separated sweep values (default per kind)")
    w.add_argument("--alpha", default=None,
                   help="comma-separated path-loss exponents, one file each")
    w.add_argument("--workers", type=int, default=1)

    t = sub.add_parser("timing", parents=[common], help="solver cost versus size")
    t.add_argument("--users", default="6,8,10,12,14,16,18")

    m = sub.add_parser("mobility", parents=[common], help="stale-decision evaluation")
    m.add_argument("--users", type=int, default=12)
    m.add_argument("--intervals", type=int, default=200)
    m.add_argument("--latencies", default="0.005,0.040",
                   help="comma-separated CIM latencies in seconds")

    c = sub.add_parser("trace", parents=[common], help="CIM amplitude trace")
    c.add_argument("--users", type=int, default=12)
    return p


def _load_settings(path):
    vals = read_key_values(path) if path else {}
    vals = {k: v for k, v in vals.items() if k != "seed"}
    radio = RadioConfig(**coerce_fields(RadioConfig, vals))
    cim = CimConfig(**coerce_fields(CimConfig, vals))
    sa = SaConfig(**coerce_fields(SaConfig, vals))
    scaling = tuple(float(vals.get(k, d)) for k, d in zip(("epsilon", "zeta", "eta"),
                                                           DEFAULT_SCALING))
    return radio, MethodOptions(cim, sa, scaling)


def _methods(arg, default):
    if not arg:
        return default
    out = [m.strip() for m in arg.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad:
        raise ValueError(f"unknown method(s): {', '.join(bad)}")
    return tuple(out)


def _floats(arg):
    return [float(v) for v in arg.split(",") if v.strip()]


def _cmd_gen(a, radio, opts):
    scen = generate_scenario(radio, a.users, a.seed)
    path = a.out / "scenario.txt"
    dump_scenario(scen, path)
    print(path)


def _cmd_solve(a, radio, opts):
    scen = load_scenario(a.scenario) if a.scenario else generate_scenario(radio, a.users, a.seed)
    methods = _methods(a.methods, ("cim", "sa", "cnoma", "es", "random"))
    path = a.out / "solve.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SOLVE_COLUMNS)
        for m in methods:
            r = run_pipeline(scen, m, opts, a.seed)
            pairs = ";".join(f"{i}-{k}" for i, k in r.assignment.pairs())
            wr.writerow([m, format_float(r.total_rate), format_float(r.wall_clock_s),
                         int(r.feasible), int(r.repaired), r.seed, r.work, pairs,
                         " ".join(format_float(v) for v in r.per_user_rates)])
            print(f"{m:8s} {r.total_rate / 1e6:12.6f} Mbit/s  {r.wall_clock_s:9.4f} s")
    print(path)


def _cmd_sweep(a, radio, opts):
    methods = _methods(a.methods, ("cim", "sa", "cnoma", "random"))
    values = _floats(a.values) if a.values else None
    if values is not None and a.kind != "power":
        values = [int(v) for v in values]
    alphas = _floats(a.alpha) if a.alpha else [None]
    for alpha in alphas:
        cfg = radio if alpha is None else radio.replace(pathloss_exponent=alpha)
        rows = sweep(a.kind, values, a.trials, methods, a.seed, cfg, opts, a.workers)
        suffix = "" if alpha is None else f"_alpha{alpha:g}"
        path = a.out / f"sweep_{a.kind}{suffix}.csv"
        write_sweep_csv(rows, path)
        print(path)


def _cmd_timing(a, radio, opts):
    counts = [int(v) for v in a.users.split(",") if v.strip()]
    rows = timing_bench(counts, _methods(a.methods, ("cim", "sa", "es")), a.seed, radio, opts)
    path = a.out / "timing.csv"
    write_timing_csv(rows, path)
    print(path)


def _cmd_mobility(a, radio, opts):
    def cim_solver(scen):
        return run_pipeline(scen, "cim", opts, a.seed).assignment

    def es_solver(scen):
        return run_pipeline(scen, "es", opts).assignment

    solvers = [TimedSolver(f"cim@{lat:g}s", lat, cim_solver) for lat in _floats(a.latencies)]
    mob = MobilityConfig(num_intervals=a.intervals, seed=a.seed)
    records = dynamic_eval(solvers, mob, radio, a.users, es_solver)
    path = a.out / "mobility.csv"
    write_dynamic_csv(records, path)
    print(path)


def _cmd_trace(a, radio, opts):
    scen = generate_scenario(radio, a.users, a.seed)
    table = build_rate_table(compute_cnr(scen), [1.0] * radio.num_channels, radio)
    _, _, problem = encode(table, opts.scaling)
    _, trace = simulate(problem, opts.cim.replace(seed=a.seed))
    path = a.out / "trace.csv"
    write_trace_csv(trace, path)
    print(path)


_COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "sweep": _cmd_sweep,
             "timing": _cmd_timing, "mobility": _cmd_mobility, "trace": _cmd_trace}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        radio, opts = _load_settings(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](args, radio, opts)
    except InfeasibleQoS as exc:
        print(f"nomacim: infeasible rate floors: {exc}", file=sys.stderr)
        return EXIT_QOS
    except ProblemTooLarge as exc:
        print(f"nomacim: problem too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except NumericalDivergence as exc:
        print(f"nomacim: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NomaError, ValueError, OSError) as exc:
        print(f"nomacim: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
