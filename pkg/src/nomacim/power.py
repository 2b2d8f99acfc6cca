"""Intra-pair power split and water-filling of the base-station budget.

Within a channel the strong user gets just enough power for the weak user's
SINR to land exactly on ``A - 1``; the remaining degree of freedom is the
channel budget ``q_j``, distributed across channels by water-filling with a
per-channel floor that keeps both users at or above their minimum rate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import RadioConfig
from .errors import InfeasibleQoS, QosInfeasible

__all__ = [
    "PowerSplit",
    "WaterFillingResult",
    "strong_user_power",
    "pair_power_split",
    "channel_qos_floor",
    "water_fill",
]


@dataclass(frozen=True)
class PowerSplit:
    strong_user_power: float
    weak_user_power: float
    channel_power: float


@dataclass(frozen=True)
class WaterFillingResult:
    q: np.ndarray
    lambda_level: float
    floors: np.ndarray


def strong_user_power(gamma_weak, q, A):
    """Power for the stronger user of a pair, ``(G_w q - A + 1) / (A G_w)``.

    Vectorised over numpy arrays; the weak user receives ``q`` minus this.
    """
    gamma_weak = np.asarray(gamma_weak, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (gamma_weak * q - A + 1.0) / (A * gamma_weak)


def channel_qos_floor(gamma_strong: float, gamma_weak: Optional[float] = None,
                      A_strong: float = 4.0, A_weak: Optional[float] = None) -> float:
    """Smallest channel power at which every user on the channel meets its
    minimum rate.

    With ``gamma_weak=None`` the channel carries a single (OMA) user and the
    floor reduces to ``(A - 1) / gamma``.
    """
    if A_weak is None:
        A_weak = A_strong
    with np.errstate(divide="ignore"):
        if gamma_weak is None:
            return float(np.float64(A_strong - 1.0) / gamma_strong)
        return float(A_weak * (A_strong - 1.0) / np.float64(gamma_strong)
                     + (A_weak - 1.0) / np.float64(gamma_weak))


def pair_power_split(gamma_strong: float, gamma_weak: Optional[float], q_j: float,
                     A: float) -> PowerSplit:
    """Closed-form split of ``q_j`` between the two users of a channel.

    Raises
    ------
    QosInfeasible
        If ``q_j`` is below the channel's QoS floor.
    """
    if q_j <= 0:
        raise ValueError("q_j must be positive")
    floor = channel_qos_floor(gamma_strong, gamma_weak, A)
    if q_j < floor * (1 - 1e-12):
        raise QosInfeasible(f"channel power {q_j!r} below QoS floor {floor!r}")
    if gamma_weak is None:
        return PowerSplit(float(q_j), 0.0, float(q_j))
    if not gamma_strong > gamma_weak > 0:
        raise ValueError("need gamma_strong > gamma_weak > 0")
    p_strong = float(strong_user_power(gamma_weak, q_j, A))
    return PowerSplit(p_strong, float(q_j) - p_strong, float(q_j))


def _channel_terms(entry, A):
    # returns (offset c_j, floor gamma_j) so that q_j = max(level - c_j, gamma_j)
    if entry is None:
        return None
    gs, gw = (entry[0], entry[1] if len(entry) > 1 else None)
    with np.errstate(divide="ignore", invalid="ignore"):
        if gw is None:
            return 1.0 / np.float64(gs), channel_qos_floor(gs, None, A)
        return (A / np.float64(gs) - (A - 1.0) / np.float64(gw),
                channel_qos_floor(gs, gw, A))


def water_fill(pairs: Sequence, total_power: float, config: RadioConfig,
               max_iter: int = 200) -> WaterFillingResult:
    """Distribute ``total_power`` over channels.

    Parameters
    ----------
    pairs : sequence
        One entry per channel: ``(gamma_strong, gamma_weak)`` for a NOMA pair,
        ``(gamma,)`` or ``(gamma, None)`` for a single user, ``None`` for a
        channel carrying nobody (it gets zero power).
    total_power : float
        Budget ``P_T`` in watts.
    config : RadioConfig
        Supplies the channel bandwidth and ``A``.

    Returns
    -------
    WaterFillingResult
        ``q`` sums to ``total_power`` and respects every floor.

    Raises
    ------
    InfeasibleQoS
        When the floors alone exceed the budget.
    """
    A = config.qos_factor
    bc = config.channel_bandwidth_hz
    terms = [_channel_terms(p, A) for p in pairs]
    used = np.array([t is not None for t in terms])
    n = len(terms)
    offsets = np.array([t[0] if t is not None else 0.0 for t in terms])
    floors = np.array([t[1] if t is not None else 0.0 for t in terms])
    if not used.any():
        raise InfeasibleQoS("no channel carries a real user")
    if not np.all(np.isfinite(floors)) or floors.sum() > total_power * (1 + 1e-12):
        raise InfeasibleQoS(
            f"QoS floors need {floors.sum()!r} W, budget is {total_power!r} W")

    off_u, flo_u = offsets[used], floors[used]

    def allocated(level):
        return np.maximum(level - off_u, flo_u).sum()

    lo = float(np.min(flo_u + off_u))
    span = max(total_power, 1e-300)
    hi = lo + span
    while allocated(hi) < total_power:
        span *= 2.0
        hi = lo + span
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if allocated(mid) < total_power:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)

    # settle the clamped set, then solve the free channels' level exactly
    for _ in range(n + 1):
        free = level - off_u > flo_u
        if not free.any():
            break
        new_level = (total_power - flo_u[~free].sum() + off_u[free].sum()) / free.sum()
        if np.array_equal(new_level - off_u > flo_u, free):
            level = new_level
            break
        level = new_level
    q_u = np.maximum(level - off_u, flo_u)
    q = np.zeros(n)
    q[used] = q_u
    return WaterFillingResult(q=q, lambda_level=float(bc / level) if level > 0 else np.inf,
                              floors=floors)
