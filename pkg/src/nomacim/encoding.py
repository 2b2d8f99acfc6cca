"""Penalty encoding of the channel-assignment problem.

The assignment grid ``x`` (entities x channels, binary) is scored by

* ``E1 = -sum_j sum_{i != k} S[i, j, k] x_ij x_kj`` with ``S`` the pair
  throughput ``R[i,j,k] + R[k,j,i]`` (normalised),
* ``E2 = sum_i (sum_j x_ij - 1)**2``  (one channel per entity),
* ``E3 = sum_j (sum_i x_ij - 2)**2``  (two entities per channel),

combined as ``eps*E1 + zeta*E2 + eta*E3``. Dropping the constants of E2/E3
leaves a Hopfield energy ``-1/2 x.w.x + theta.x``, which maps onto Ising
couplings and fields through ``x = (sigma + 1) / 2``.

Dense matrices are indexed by the flattened spin ``i * num_channels + j``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .assignment import Assignment
from .config import format_float
from .radio import RateTable

__all__ = [
    "EnergyTerms",
    "NetworkWeights",
    "IsingProblem",
    "Decoded",
    "DEFAULT_SCALING",
    "build_energy_terms",
    "derive_weights",
    "to_ising",
    "encode",
    "nn_energy",
    "ising_energy",
    "decode",
    "dump_problem",
    "load_problem",
]

DEFAULT_SCALING = (1.0, 3.5, 3.5)


@dataclass(frozen=True, eq=False)
class EnergyTerms:
    """Coefficients of the three energy terms.

    ``pair_rate[i, j, k]`` is the normalised throughput of ``{i, k}`` on
    channel ``j`` (zero on ``i == k``); ``rate_scale`` is the bit/s value of
    one normalised unit.
    """

    pair_rate: np.ndarray
    rate_scale: float

    @property
    def num_entities(self) -> int:
        return self.pair_rate.shape[0]

    @property
    def num_channels(self) -> int:
        return self.pair_rate.shape[1]

    def e1(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.num_entities, self.num_channels)
        # sum_j x[:, j] . S[:, j, :] . x[:, j]
        return -float(np.einsum("ij,ijk,kj->", x, self.pair_rate, x))

    def e2(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.num_entities, self.num_channels)
        return float(((x.sum(axis=1) - 1.0) ** 2).sum())

    def e3(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.num_entities, self.num_channels)
        return float(((x.sum(axis=0) - 2.0) ** 2).sum())

    def total(self, x, scaling=DEFAULT_SCALING) -> float:
        eps, zeta, eta = scaling
        return eps * self.e1(x) + zeta * self.e2(x) + eta * self.e3(x)

    def constant(self, scaling=DEFAULT_SCALING) -> float:
        """Constant part of ``zeta*E2 + eta*E3`` absent from the network energy."""
        _, zeta, eta = scaling
        return zeta * self.num_entities + eta * 4.0 * self.num_channels


@dataclass(frozen=True, eq=False)
class NetworkWeights:
    w: np.ndarray
    theta: np.ndarray
    scaling: tuple
    shape: tuple

    @property
    def num_neurons(self) -> int:
        return self.theta.size


@dataclass(frozen=True, eq=False)
class IsingProblem:
    J: np.ndarray
    h: np.ndarray
    shape: tuple

    @property
    def num_spins(self) -> int:
        return self.h.size

    # the external field is called lambda in the energy; keep both spellings
    @property
    def lam(self) -> np.ndarray:
        return self.h


class Decoded(NamedTuple):
    assignment: Assignment
    feasible: bool
    repaired: bool


def build_energy_terms(rate_table: RateTable, normalize: bool = True) -> EnergyTerms:
    """Pair-throughput coefficients of ``E1``.

    With ``normalize`` the throughputs are divided by the largest one, so
    that a unit of penalty outweighs any single pair's contribution.
    """
    S = np.array(rate_table.pair_sum(), dtype=float)
    n = S.shape[0]
    S[np.arange(n), :, np.arange(n)] = 0.0
    scale = float(S.max()) if normalize else 1.0
    if scale <= 0:
        scale = 1.0
    S /= scale
    S.setflags(write=False)
    return EnergyTerms(S, scale)


def derive_weights(terms: EnergyTerms, scaling=DEFAULT_SCALING) -> NetworkWeights:
    """Coupling weights and thresholds of the Hopfield network.

    ``w_ijkl = 2(eps d_jl (1-d_ik) S_ijk - zeta d_ik (1-d_jl) - eta d_jl (1-d_ik))``
    and ``theta_ij = -(zeta + 3 eta)``.
    """
    eps, zeta, eta = (float(s) for s in scaling)
    if min(eps, zeta, eta) <= 0:
        raise ValueError("scaling factors must be positive")
    n, nc = terms.num_entities, terms.num_channels
    w = np.zeros((n, nc, n, nc))
    off_user = 1.0 - np.eye(n)
    for j in range(nc):
        w[:, j, :, j] = 2.0 * (eps * terms.pair_rate[:, j, :] - eta) * off_user
    off_chan = 1.0 - np.eye(nc)
    for i in range(n):
        w[i, :, i, :] = -2.0 * zeta * off_chan
    w = w.reshape(n * nc, n * nc)
    theta = np.full(n * nc, -(zeta + 3.0 * eta))
    w.setflags(write=False)
    theta.setflags(write=False)
    return NetworkWeights(w, theta, (eps, zeta, eta), (n, nc))


def to_ising(weights: NetworkWeights) -> IsingProblem:
    """``J = w / 2`` and ``lambda = theta - sum_b w_ab / 2``."""
    J = weights.w / 2.0
    h = weights.theta - weights.w.sum(axis=1) / 2.0
    J.setflags(write=False)
    h.setflags(write=False)
    return IsingProblem(J, h, weights.shape)


def encode(rate_table: RateTable, scaling=DEFAULT_SCALING):
    """Convenience: terms, weights and Ising problem for a rate table."""
    terms = build_energy_terms(rate_table)
    weights = derive_weights(terms, scaling)
    return terms, weights, to_ising(weights)


def nn_energy(x, weights: NetworkWeights) -> float:
    x = np.asarray(x, dtype=float).ravel()
    return float(-0.5 * x @ weights.w @ x + weights.theta @ x)


def ising_energy(sigma, problem: IsingProblem) -> float:
    s = np.asarray(sigma, dtype=float).ravel()
    return float(-0.5 * s @ problem.J @ s + problem.h @ s)


def _pair_gain(S, entity, channel, members):
    return float(sum(S[entity, channel, m] for m in members))


def decode(sigma, rate_table: RateTable) -> Decoded:
    """Map spins to an assignment (``+1`` = uses the channel), repairing
    greedily when the constraints are violated.

    Repair keeps, for an entity on several channels, the channel where it
    contributes most; trims over-full channels by dropping their weakest
    contributors; then repeatedly places the unassigned entity and under-full channel
    pair with the largest throughput gain (ties: lowest entity, channel).
    """
    n, nc = rate_table.num_entities, rate_table.num_channels
    x = (np.asarray(sigma).reshape(n, nc) > 0).astype(np.int8)
    first = Assignment(x)
    if first.is_feasible():
        return Decoded(first, True, False)

    S = rate_table.pair_sum()
    members = [set(np.flatnonzero(x[:, j]).tolist()) for j in range(nc)]

    for i in range(n):
        chans = np.flatnonzero(x[i])
        if len(chans) > 1:
            gains = [_pair_gain(S, i, j, members[j] - {i}) for j in chans]
            keep = chans[int(np.argmax(gains))]
            for j in chans:
                if j != keep:
                    members[j].discard(i)
                    x[i, j] = 0

    for j in range(nc):
        while len(members[j]) > 2:
            ms = sorted(members[j])
            gains = [_pair_gain(S, m, j, members[j] - {m}) for m in ms]
            drop = ms[int(np.argmin(gains))]
            members[j].discard(drop)
            x[drop, j] = 0

    waiting = [i for i in range(n) if not x[i].any()]
    while waiting:
        best = None
        for i in waiting:
            for j in range(nc):
                if len(members[j]) < 2:
                    g = _pair_gain(S, i, j, members[j])
                    if best is None or g > best[0]:
                        best = (g, i, j)
        _, i, j = best
        members[j].add(i)
        x[i, j] = 1
        waiting.remove(i)

    fixed = Assignment(x)
    fixed.validate()
    return Decoded(fixed, False, True)


def dump_problem(problem: IsingProblem, fp=None) -> str:
    """Text export: ``num_spins``, then the field vector, then ``J`` row-major."""
    buf = io.StringIO()
    buf.write(f"{problem.num_spins}\n")
    buf.write(" ".join(format_float(v) for v in problem.h) + "\n")
    for row in problem.J:
        buf.write(" ".join(format_float(v) for v in row) + "\n")
    text = buf.getvalue()
    if fp is not None:
        if isinstance(fp, (str, Path)):
            Path(fp).write_text(text)
        else:
            fp.write(text)
    return text


def load_problem(src, shape=None) -> IsingProblem:
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    elif isinstance(src, str):
        text = src
    else:
        text = src.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n = int(lines[0])
    h = np.array([float(v) for v in lines[1].split()])
    J = np.array([[float(v) for v in ln.split()] for ln in lines[2:2 + n]])
    if h.size != n or J.shape != (n, n):
        raise ValueError("malformed Ising problem text")
    return IsingProblem(J, h, tuple(shape) if shape is not None else (n,))
