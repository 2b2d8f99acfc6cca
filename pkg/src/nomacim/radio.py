"""Scenario generation, carrier-to-noise ratios and the pairwise rate table."""
from __future__ import annotations

import io
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .assignment import Assignment
from .config import RadioConfig, coerce_fields, format_float
from .power import strong_user_power, water_fill

__all__ = [
    "Scenario",
    "CnrMatrix",
    "RateTable",
    "PowerAllocation",
    "generate_scenario",
    "compute_cnr",
    "build_rate_table",
    "total_rate",
    "per_user_rates",
    "allocate_power",
    "channel_pairs",
    "dump_scenario",
    "load_scenario",
]

# E[g**2] = 2 * scale**2 = 1
RAYLEIGH_SCALE = 1.0 / np.sqrt(2.0)
_FEAS_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Scenario:
    config: RadioConfig
    distances: np.ndarray
    fading: np.ndarray
    seed: int = 0

    def __post_init__(self):
        d = np.array(self.distances, dtype=float)
        g = np.array(self.fading, dtype=float).reshape(len(d), -1)
        cfg = self.config
        if len(d) < 2:
            raise ValueError("a scenario needs at least two users")
        if len(d) > 2 * cfg.num_channels:
            raise ValueError(f"{len(d)} users do not fit on {cfg.num_channels} channels")
        if g.shape[1] != cfg.num_channels:
            raise ValueError("fading rows must have one entry per channel")
        if np.any(d < cfg.min_distance_m) or np.any(d > cfg.cell_radius_m):
            raise ValueError("user distance outside [min_distance_m, cell_radius_m]")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("fading coefficients must be finite and non-negative")
        d.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "fading", g)

    @property
    def num_users(self) -> int:
        return len(self.distances)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.config == other.config and self.seed == other.seed
                and np.array_equal(self.distances, other.distances)
                and np.array_equal(self.fading, other.fading))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CnrMatrix:
    """``values[i, j]``: carrier-to-noise ratio of real user ``i`` on channel ``j``."""

    values: np.ndarray

    @property
    def num_users(self) -> int:
        return self.values.shape[0]

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class RateTable:
    """``entries[i, j, k]``: rate (bit/s) of entity ``i`` sharing channel ``j``
    with entity ``k``.

    Rows ``num_real_users ..`` are dummy users with zero rate; a real user
    sharing with a dummy transmits alone. ``infeasible`` marks pairs whose
    channel power sits below the QoS floor; their entries are zero.
    """

    entries: np.ndarray
    num_real_users: int
    num_dummy_users: int
    infeasible: np.ndarray
    channel_power: np.ndarray

    @property
    def num_entities(self) -> int:
        return self.entries.shape[0]

    @property
    def num_channels(self) -> int:
        return self.entries.shape[1]

    def pair_sum(self) -> np.ndarray:
        """``R[i, j, k] + R[k, j, i]``: the channel throughput of the pair."""
        return self.entries + self.entries.transpose(2, 1, 0)


def generate_scenario(config: RadioConfig, num_users: int, seed: int) -> Scenario:
    """Drop ``num_users`` users uniformly (in area) over the annulus between
    the minimum distance and the cell radius, with i.i.d. unit-power
    Rayleigh fading per channel.

    Each user draws from its own child stream of ``seed``, so user ``i`` of a
    scenario is the same for any ``num_users > i`` and its first ``n``
    fading draws are shared by every channel count ``>= n``.
    """
    if num_users < 2:
        raise ValueError("num_users must be at least 2")
    if num_users > 2 * config.num_channels:
        raise ValueError(f"{num_users} users exceed 2 x {config.num_channels} channel slots")
    r0, r1 = config.min_distance_m, config.cell_radius_m
    children = np.random.SeedSequence(seed).spawn(num_users)
    distances = np.empty(num_users)
    fading = np.empty((num_users, config.num_channels))
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        distances[i] = np.sqrt(r0 ** 2 + rng.random() * (r1 ** 2 - r0 ** 2))
        fading[i] = rng.rayleigh(RAYLEIGH_SCALE, size=config.num_channels)
    # sqrt can round a hair outside the annulus
    distances = np.clip(distances, r0, r1)
    return Scenario(config, distances, fading, seed)


def compute_cnr(scenario: Scenario) -> CnrMatrix:
    cfg = scenario.config
    gain = scenario.fading ** 2 * scenario.distances[:, None] ** (-cfg.pathloss_exponent)
    values = gain / cfg.noise_power_w
    values.setflags(write=False)
    return CnrMatrix(values)


def _stronger(g_i, g_k, i_idx, k_idx):
    # tie goes to the lower index
    return (g_i > g_k) | ((g_i == g_k) & (i_idx < k_idx))


def _noma_rate(g_self, g_other, self_strong, q, A, bc):
    """Rate of a user sharing a channel with another real user, plus a
    feasibility mask (channel power at or above the pair's QoS floor)."""
    g_s = np.where(self_strong, g_self, g_other)
    g_w = np.where(self_strong, g_other, g_self)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p_s = strong_user_power(g_w, q, A)
        p_w = q - p_s
        strong_rate = bc * np.log2(1.0 + p_s * g_self)
        weak_rate = bc * np.log2(1.0 + p_w * g_self / (1.0 + p_s * g_self))
        floor = A * (A - 1.0) / g_s + (A - 1.0) / g_w
        feasible = (g_w > 0) & (q >= floor * (1 - _FEAS_RTOL))
    rate = np.where(self_strong, strong_rate, weak_rate)
    return np.where(feasible, rate, 0.0), feasible


def _oma_rate(g, q, A, bc):
    with np.errstate(divide="ignore", invalid="ignore"):
        feasible = (g > 0) & (q * g >= (A - 1.0) * (1 - _FEAS_RTOL))
        rate = bc * np.log2(1.0 + q * g)
    return np.where(feasible, rate, 0.0), feasible


def build_rate_table(cnr: CnrMatrix, per_channel_power: Sequence[float],
                     config: RadioConfig) -> RateTable:
    """Tabulate every entity's rate for every partner and channel at the
    channel powers ``per_channel_power``.

    The table is padded with ``2 * N_c - N_u`` dummy users.
    """
    G = np.asarray(cnr.values, dtype=float)
    nu, nc = G.shape
    if nc != config.num_channels:
        raise ValueError("CNR matrix and config disagree on the channel count")
    q = np.broadcast_to(np.asarray(per_channel_power, dtype=float), (nc,)).copy()
    if np.any(q <= 0):
        raise ValueError("per-channel power must be positive")
    n = 2 * nc
    if nu > n:
        raise ValueError("more users than channel slots")
    A, bc = config.qos_factor, config.channel_bandwidth_hz

    entries = np.zeros((n, nc, n))
    infeasible = np.zeros((n, nc, n), dtype=bool)

    gi = G[:, :, None]                     # (nu, nc, 1)
    gk = G.T[None, :, :]                   # (1, nc, nu)
    idx = np.arange(nu)
    i_strong = _stronger(gi, gk, idx[:, None, None], idx[None, None, :])
    qq = q[None, :, None]
    rate, ok = _noma_rate(gi, gk, i_strong, qq, A, bc)
    # feasibility is a property of the pair, whichever side we look from
    ok = ok & ok.transpose(2, 1, 0)
    rate = np.where(ok, rate, 0.0)
    same = np.eye(nu, dtype=bool)[:, None, :]
    entries[:nu, :, :nu] = np.where(same, 0.0, rate)
    infeasible[:nu, :, :nu] = ~ok & ~same

    oma, oma_ok = _oma_rate(G, q[None, :], A, bc)
    entries[:nu, :, nu:] = oma[:, :, None]
    infeasible[:nu, :, nu:] = ~oma_ok[:, :, None]
    entries.setflags(write=False)
    infeasible.setflags(write=False)
    return RateTable(entries, nu, n - nu, infeasible, q)


def per_user_rates(assignment: Assignment, rate_table: RateTable) -> np.ndarray:
    """Rate of every real user under ``assignment``."""
    assignment.validate()
    R = rate_table.entries
    out = np.zeros(rate_table.num_real_users)
    for j, (a, b) in enumerate(assignment.pairs()):
        if a < len(out):
            out[a] = R[a, j, b]
        if b < len(out):
            out[b] = R[b, j, a]
    return out


def total_rate(assignment: Assignment, rate_table: RateTable) -> float:
    """Sum over channels of the two co-channel entities' rates.

    Each unordered pair is counted once (half of the ordered double sum).
    """
    assignment.validate()
    if assignment.x.shape != rate_table.entries.shape[:2]:
        raise ValueError("assignment and rate table sizes differ")
    R = rate_table.entries
    return float(sum(R[a, j, b] + R[b, j, a] for j, (a, b) in enumerate(assignment.pairs())))


def channel_pairs(assignment: Assignment, cnr: CnrMatrix) -> list:
    """Per channel ``(G_strong, G_weak)``, ``(G,)`` or ``None`` as consumed by
    :func:`~nomacim.power.water_fill`."""
    G = cnr.values
    nu = cnr.num_users
    out = []
    for j, (a, b) in enumerate(assignment.pairs()):
        real = [u for u in (a, b) if u < nu]
        if len(real) == 2:
            s, w = (a, b) if _stronger(G[a, j], G[b, j], a, b) else (b, a)
            out.append((G[s, j], G[w, j]))
        elif len(real) == 1:
            out.append((G[real[0], j],))
        else:
            out.append(None)
    return out


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    q: np.ndarray
    lambda_level: float
    rate_table: RateTable
    per_user_rates: np.ndarray
    total_rate: float


def allocate_power(assignment: Assignment, cnr: CnrMatrix, config: RadioConfig,
                   total_power: float | None = None) -> PowerAllocation:
    """Water-fill the budget over the channels of ``assignment`` and
    recompute every user's rate with the resulting split.

    Raises :class:`~nomacim.errors.InfeasibleQoS` when the floors do not fit.
    """
    pt = config.total_power_w if total_power is None else total_power
    wf = water_fill(channel_pairs(assignment, cnr), pt, config)
    # idle channels get zero power; any positive stand-in leaves their
    # (unused) table entries irrelevant
    q_table = np.where(wf.q > 0, wf.q, 1.0)
    table = build_rate_table(cnr, q_table, config)
    rates = per_user_rates(assignment, table)
    return PowerAllocation(wf.q, wf.lambda_level, table, rates, float(rates.sum()))


_HEADER = "# nomacim scenario v1"


def dump_scenario(scenario: Scenario, fp=None) -> str:
    """Serialise to the line format: ``key=value`` header lines, then one row
    per user ``index distance g_1 .. g_Nc``."""
    buf = io.StringIO()
    buf.write(_HEADER + "\n")
    for f in fields(RadioConfig):
        v = getattr(scenario.config, f.name)
        buf.write(f"{f.name}={format_float(v) if isinstance(v, float) else v}\n")
    buf.write(f"seed={scenario.seed}\n")
    buf.write(f"num_users={scenario.num_users}\n")
    for i, (d, g) in enumerate(zip(scenario.distances, scenario.fading)):
        buf.write(" ".join([str(i), format_float(d)] + [format_float(v) for v in g]) + "\n")
    text = buf.getvalue()
    if fp is not None:
        if isinstance(fp, (str, Path)):
            Path(fp).write_text(text)
        else:
            fp.write(text)
    return text


def load_scenario(src) -> Scenario:
    """Inverse of :func:`dump_scenario`; accepts a path, file object or text."""
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    elif isinstance(src, str):
        text = src
    else:
        text = src.read()
    header, rows = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            k, v = line.split("=", 1)
            header[k.strip()] = v.strip()
        else:
            rows.append(line.split())
    config = RadioConfig(**coerce_fields(RadioConfig, header))
    n = int(header.get("num_users", len(rows)))
    if len(rows) != n:
        raise ValueError(f"expected {n} user rows, found {len(rows)}")
    rows.sort(key=lambda r: int(r[0]))
    distances = np.array([float(r[1]) for r in rows])
    fading = np.array([[float(v) for v in r[2:]] for r in rows])
    return Scenario(config, distances, fading, int(header.get("seed", 0)))
