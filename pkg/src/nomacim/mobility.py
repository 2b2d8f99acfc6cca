"""Manhattan-grid vehicle mobility and stale-information evaluation.

Users drive along road centre lines of a rectangular grid that wraps at the
area boundary. A base station sits at the centre of the area. At each
decision interval the fading is redrawn and each solver is scored on the
current channel using an assignment computed from an older snapshot, the
age being set by the solver's latency.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .assignment import Assignment
from .config import RadioConfig, format_float
from .radio import RAYLEIGH_SCALE, Scenario, allocate_power, compute_cnr

__all__ = [
    "EAST", "NORTH", "WEST", "SOUTH",
    "MobilityConfig",
    "MobileUser",
    "TimedSolver",
    "DynamicRecord",
    "init_mobility",
    "step",
    "on_road",
    "distances_to_station",
    "staleness",
    "dynamic_eval",
    "write_dynamic_csv",
    "DYNAMIC_COLUMNS",
]

EAST, NORTH, WEST, SOUTH = 0, 1, 2, 3
_UNIT = {EAST: (1.0, 0.0), NORTH: (0.0, 1.0), WEST: (-1.0, 0.0), SOUTH: (0.0, -1.0)}
_SNAP = 1e-9


@dataclass(frozen=True)
class MobilityConfig:
    area_m: tuple = (1299.0, 750.0)
    grid_m: tuple = (433.0, 250.0)
    speed_range_kmh: tuple = (36.0, 54.0)
    decision_interval_s: float = 0.020
    num_intervals: int = 200
    seed: int = 0

    def __post_init__(self):
        for a, g in zip(self.area_m, self.grid_m):
            if g <= 0 or a <= 0:
                raise ValueError("area and grid sizes must be positive")
            if abs(a / g - round(a / g)) > 1e-12:
                raise ValueError("area must be an integer multiple of the grid block")
        lo, hi = self.speed_range_kmh
        if not 0 < lo <= hi:
            raise ValueError("speeds must be positive with lo <= hi")
        if self.decision_interval_s <= 0 or self.num_intervals < 1:
            raise ValueError("decision_interval_s and num_intervals must be positive")

    @property
    def station(self) -> tuple:
        return (self.area_m[0] / 2.0, self.area_m[1] / 2.0)

    @property
    def max_distance_m(self) -> float:
        return math.hypot(*self.station)

    @property
    def num_lines(self) -> tuple:
        """(vertical roads, horizontal roads)."""
        return (round(self.area_m[0] / self.grid_m[0]), round(self.area_m[1] / self.grid_m[1]))

    def replace(self, **changes) -> "MobilityConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class MobileUser:
    x: float
    y: float
    heading: int
    speed_mps: float

    @property
    def position(self) -> tuple:
        return (self.x, self.y)


def _on_line(v: float, g: float) -> bool:
    return abs(v - round(v / g) * g) <= _SNAP * max(1.0, g)


def on_road(user: MobileUser, config: MobilityConfig) -> bool:
    """True when the user sits on a centre line and heads along it."""
    gx, gy = config.grid_m
    if user.heading in (EAST, WEST):
        return _on_line(user.y, gy)
    return _on_line(user.x, gx)


def init_mobility(config: MobilityConfig, num_users: int, rng=None) -> list:
    """Uniform placement over total road length, i.e. a Poisson process on
    the roads conditioned on the user count."""
    if num_users < 2:
        raise ValueError("num_users must be at least 2")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    (w, h), (gx, gy) = config.area_m, config.grid_m
    nv, nh = config.num_lines
    horiz_len, vert_len = nh * w, nv * h
    lo, hi = (s / 3.6 for s in config.speed_range_kmh)
    users = []
    for _ in range(num_users):
        u = rng.random() * (horiz_len + vert_len)
        if u < horiz_len:
            line, x = divmod(u, w)
            y = int(line) * gy
            heading = EAST if rng.random() < 0.5 else WEST
        else:
            line, y = divmod(u - horiz_len, h)
            x = int(line) * gx
            heading = NORTH if rng.random() < 0.5 else SOUTH
        users.append(MobileUser(float(x), float(y), heading, float(rng.uniform(lo, hi))))
    return users


def _turn(heading: int, rng) -> int:
    # straight, left, right with equal probability; no U-turns
    return (heading, (heading + 1) % 4, (heading + 3) % 4)[int(rng.integers(3))]


def _advance(user: MobileUser, dist: float, config: MobilityConfig, rng) -> MobileUser:
    (w, h), (gx, gy) = config.area_m, config.grid_m
    x, y, hd = user.x, user.y, user.heading
    remaining = dist
    while True:
        if _on_line(x, gx) and _on_line(y, gy):
            x, y = round(x / gx) * gx % w, round(y / gy) * gy % h
            hd = _turn(hd, rng)
        dx, dy = _UNIT[hd]
        if dx:
            k = math.floor(x / gx + _SNAP) + 1 if dx > 0 else math.ceil(x / gx - _SNAP) - 1
            gap = abs(k * gx - x)
        else:
            k = math.floor(y / gy + _SNAP) + 1 if dy > 0 else math.ceil(y / gy - _SNAP) - 1
            gap = abs(k * gy - y)
        if remaining < gap:
            x, y = (x + dx * remaining) % w, (y + dy * remaining) % h
            return MobileUser(x, y, hd, user.speed_mps)
        # reach the next intersection exactly
        if dx:
            x = (k * gx) % w
        else:
            y = (k * gy) % h
        remaining -= gap
        if remaining <= 0.0:
            return MobileUser(x, y, hd, user.speed_mps)


def step(users: Sequence[MobileUser], dt: float, config: MobilityConfig, rng) -> list:
    """Advance every user by ``speed * dt`` along the roads.

    A user that starts at, or passes through, an intersection picks
    straight/left/right uniformly there and spends the residual distance
    on the new road. Positions wrap around the area.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    return [_advance(u, u.speed_mps * dt, config, rng) for u in users]


def distances_to_station(users: Sequence[MobileUser], config: MobilityConfig,
                         min_distance_m: float = 50.0) -> np.ndarray:
    sx, sy = config.station
    d = np.array([math.hypot(u.x - sx, u.y - sy) for u in users])
    return np.maximum(d, min_distance_m)


def staleness(latency_s: float, interval_s: float) -> int:
    """Number of whole decision intervals a result lags behind.

    A solver that finishes inside the current interval works on fresh data.
    """
    return int(math.floor(latency_s / interval_s + 1e-9))


class TimedSolver(NamedTuple):
    name: str
    latency_s: float
    solve: Callable[[Scenario], Assignment]


class DynamicRecord(NamedTuple):
    interval: int
    solver: str
    latency_s: float
    achieved_rate: float
    oracle_rate: float
    ratio: float


DYNAMIC_COLUMNS = ("interval", "solver", "latency_s", "achieved_rate", "oracle_rate", "ratio")


def dynamic_eval(solvers: Sequence[TimedSolver], config: MobilityConfig, radio: RadioConfig,
                 num_users: int, oracle: Callable[[Scenario], Assignment],
                 num_intervals: int | None = None) -> list:
    """Score each solver on the live channel with a latency-delayed decision.

    Solutions are cached per (solve callable, snapshot), so two entries that
    share a callable but differ in latency reuse the same assignments.
    Returns one ``DynamicRecord`` per scored (interval, solver).
    """
    steps = config.num_intervals if num_intervals is None else num_intervals
    radio = radio.replace(cell_radius_m=max(radio.cell_radius_m, config.max_distance_m))
    root = np.random.default_rng(config.seed)
    place_rng, move_rng, fade_rng = root.spawn(3)
    users = init_mobility(config, num_users, place_rng)
    snapshots, cnrs = [], []
    cache: dict = {}
    records = []

    def solution(fn, k):
        key = (id(fn), k)
        if key not in cache:
            cache[key] = fn(snapshots[k])
        return cache[key]

    lags = [staleness(s.latency_s, config.decision_interval_s) for s in solvers]
    for k in range(steps):
        if k:
            users = step(users, config.decision_interval_s, config, move_rng)
        fading = fade_rng.rayleigh(RAYLEIGH_SCALE, (num_users, radio.num_channels))
        scen = Scenario(radio, distances_to_station(users, config, radio.min_distance_m),
                        fading, seed=k)
        snapshots.append(scen)
        cnr = compute_cnr(scen)
        best = allocate_power(oracle(scen), cnr, radio).total_rate
        for s, lag in zip(solvers, lags):
            if k < lag:
                continue
            got = allocate_power(solution(s.solve, k - lag), cnr, radio).total_rate
            records.append(DynamicRecord(k, s.name, s.latency_s, got, best, got / best))
        # snapshots older than the largest lag are no longer needed
        horizon = k - max(lags, default=0)
        if horizon > 0:
            snapshots[horizon - 1] = None
            for key in [key for key in cache if key[1] < horizon]:
                del cache[key]
    return records


def write_dynamic_csv(records: Sequence[DynamicRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(DYNAMIC_COLUMNS)
        for r in records:
            wr.writerow([r.interval, r.solver, format_float(r.latency_s),
                         format_float(r.achieved_rate), format_float(r.oracle_rate),
                         format_float(r.ratio)])
