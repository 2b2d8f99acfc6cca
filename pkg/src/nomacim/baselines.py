"""Reference channel-assignment solvers.

``hopfield_solve`` and ``sa_solve`` work on the {0,1} network energy
``-1/2 x.w.x + theta.x``; the rest act on CNRs or the rate table directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import linear_sum_assignment

from .assignment import Assignment
from .config import RadioConfig
from .encoding import Decoded, NetworkWeights, decode
from .exhaustive import es_solve, exhaustive_search  # noqa: F401  (re-exported)
from .radio import CnrMatrix, RateTable, build_rate_table

__all__ = [
    "SaConfig",
    "HopfieldRun",
    "hopfield_run",
    "hopfield_solve",
    "sa_temperature",
    "SaRun",
    "sa_run",
    "sa_solve",
    "cnoma_solve",
    "es_solve",
    "random_solve",
    "oma_solve",
]


@dataclass(frozen=True)
class SaConfig:
    t_initial: float = 5.0
    num_sweeps: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.t_initial <= 0:
            raise ValueError("t_initial must be positive")
        if self.num_sweeps < 1:
            raise ValueError("num_sweeps must be at least 1")


@numba.njit(cache=True)
def _hopfield_sweep(x, field, w, order, energy, trace, pos):
    # trace[pos:] receives the energy after every update when non-empty
    changes = 0
    n = x.shape[0]
    for a in order:
        # a zero field leaves the neuron alone, so every flip lowers the energy
        if field[a] > 0.0:
            new = 1
        elif field[a] < 0.0:
            new = 0
        else:
            new = x[a]
        d = new - x[a]
        if d != 0:
            x[a] = new
            energy -= field[a] * d
            for b in range(n):
                field[b] += w[b, a] * d
            changes += 1
        if trace.shape[0] > 0:
            trace[pos] = energy
            pos += 1
    return changes, energy, pos


@numba.njit(cache=True)
def _boltzmann_sweep(x, field, w, order, u, temperature, energy):
    n = x.shape[0]
    for idx in range(order.shape[0]):
        a = order[idx]
        z = field[a] / temperature
        if z >= 0.0:
            prob = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            prob = ez / (1.0 + ez)
        new = 1 if u[idx] < prob else 0
        d = new - x[a]
        if d != 0:
            x[a] = new
            energy -= field[a] * d
            for b in range(n):
                field[b] += w[b, a] * d
    return energy


@numba.njit(cache=True)
def _is_feasible(x, n_rows, n_cols):
    for i in range(n_rows):
        s = 0
        for j in range(n_cols):
            s += x[i * n_cols + j]
        if s != 1:
            return False
    for j in range(n_cols):
        s = 0
        for i in range(n_rows):
            s += x[i * n_cols + j]
        if s != 2:
            return False
    return True


def _start_state(weights, rng, x0):
    if x0 is None:
        return rng.integers(0, 2, weights.num_neurons).astype(np.int64)
    return np.asarray(x0, dtype=np.int64).ravel().copy()


def _energy(x, weights):
    xf = x.astype(float)
    return float(-0.5 * xf @ weights.w @ xf + weights.theta @ xf)


@dataclass(frozen=True, eq=False)
class HopfieldRun:
    x: np.ndarray            # fixed point, flat {0,1}
    energy: float
    sweeps: int
    converged: bool
    trace: np.ndarray        # energy after every update (empty unless requested)


def hopfield_run(weights: NetworkWeights, seed: int = 0, x0=None,
                 max_sweeps: int | None = None, record: bool = False) -> HopfieldRun:
    """Asynchronous Heaviside updates in a fresh random order each sweep,
    until a sweep changes nothing or ``max_sweeps`` (default ``10 n``).

    The network starts at rest (all zeros) unless ``x0`` is given. Sweep
    orders come from the same stream that :func:`sa_run` uses for the same
    seed.
    """
    rng, _ = np.random.default_rng(seed).spawn(2)
    n = weights.num_neurons
    w = np.ascontiguousarray(weights.w, dtype=float)
    if x0 is None:
        x = np.zeros(n, dtype=np.int64)
    else:
        x = np.asarray(x0, dtype=np.int64).ravel().copy()
    field = w @ x.astype(float) - weights.theta
    energy = _energy(x, weights)
    limit = 10 * n if max_sweeps is None else max_sweeps
    trace = np.empty(limit * n if record else 0)
    pos = 0
    converged = False
    sweeps = 0
    while sweeps < limit:
        order = rng.permutation(n)
        changes, energy, pos = _hopfield_sweep(x, field, w, order, energy, trace, pos)
        sweeps += 1
        if changes == 0:
            converged = True
            break
    return HopfieldRun(x, float(energy), sweeps, converged, trace[:pos])


def hopfield_solve(weights: NetworkWeights, rate_table: RateTable, seed: int = 0,
                   x0=None) -> Decoded:
    """Deterministic descent to a fixed point, then decode (with repair)."""
    run = hopfield_run(weights, seed, x0)
    return decode(2 * run.x - 1, rate_table)


def sa_temperature(t, t_initial: float = 5.0):
    """Logarithmic cooling ``T(t) = T_ini / log(1 + t)`` for sweep ``t >= 1``."""
    return t_initial / np.log1p(t)


@dataclass(frozen=True, eq=False)
class SaRun:
    x: np.ndarray                 # final state, flat {0,1}
    best_x: np.ndarray | None     # lowest-energy feasible state seen
    best_energy: float


def sa_run(weights: NetworkWeights, config: SaConfig = SaConfig(), x0=None) -> SaRun:
    """Boltzmann-machine annealing on the network energy.

    Each sweep ``t`` (from 1) visits every neuron in random order and sets
    it to 1 with probability ``sigmoid(field / T(t))``. The state is checked
    for feasibility after every sweep.
    """
    order_rng, accept_rng = np.random.default_rng(config.seed).spawn(2)
    n = weights.num_neurons
    rows, cols = weights.shape
    w = np.ascontiguousarray(weights.w, dtype=float)
    x = _start_state(weights, order_rng, x0)
    field = w @ x.astype(float) - weights.theta
    energy = _energy(x, weights)
    best_e, best_x = np.inf, None
    for t in range(1, config.num_sweeps + 1):
        temperature = config.t_initial / math.log1p(t)
        order = order_rng.permutation(n)
        u = accept_rng.random(n)
        energy = _boltzmann_sweep(x, field, w, order, u, temperature, energy)
        if energy < best_e and _is_feasible(x, rows, cols):
            best_e, best_x = energy, x.copy()
    return SaRun(x, best_x, float(best_e))


def sa_solve(weights: NetworkWeights, rate_table: RateTable,
             config: SaConfig = SaConfig(), x0=None) -> Decoded:
    """Anneal and return the best feasible state seen; if none was
    feasible, the final state is decoded with repair."""
    run = sa_run(weights, config, x0)
    if run.best_x is None:
        return decode(2 * run.x - 1, rate_table)
    rows, cols = weights.shape
    return Decoded(Assignment(run.best_x.reshape(rows, cols)), True, False)


def cnoma_solve(cnr: CnrMatrix, config: RadioConfig) -> Assignment:
    """Near/far pairing.

    Real users are ranked by mean CNR over channels and padded with dummies
    (weakest) to ``2 N_c``; the k-th of the upper half pairs with the k-th
    of the lower half. Pairs then pick channels greedily in pairing order,
    each taking the free channel with the highest pair rate at an equal
    share ``P_T / N_c`` of power.
    """
    nu, nc = cnr.values.shape
    n = 2 * nc
    ranked = list(np.argsort(-cnr.values.mean(axis=1), kind="stable")) + list(range(nu, n))
    near, far = ranked[:nc], ranked[nc:]
    table = build_rate_table(cnr, np.full(nc, config.total_power_w / nc), config)
    S = table.pair_sum()
    free = list(range(nc))
    pairs = [None] * nc
    for a, b in zip(near, far):
        j = max(free, key=lambda c: (S[a, c, b], -c))
        pairs[j] = (int(a), int(b))
        free.remove(j)
    return Assignment.from_pairs(pairs, n)


def random_solve(num_entities: int, num_channels: int, seed: int = 0) -> Assignment:
    """Uniformly random pairing of entities laid over the channels."""
    if num_entities != 2 * num_channels:
        raise ValueError("num_entities must equal 2 * num_channels")
    perm = np.random.default_rng(seed).permutation(num_entities)
    return Assignment.from_pairs([tuple(perm[2 * j:2 * j + 2]) for j in range(num_channels)],
                                 num_entities)


def oma_solve(cnr: CnrMatrix, config: RadioConfig) -> Assignment:
    """Every real user alone on its own channel (paired with a dummy).

    The user-to-channel map maximises the summed single-user rate at an
    equal power share; needs ``N_c >= N_u``.
    """
    nu, nc = cnr.values.shape
    if nc < nu:
        raise ValueError("orthogonal access needs at least one channel per user")
    q = config.total_power_w / nc
    gain = np.log2(1.0 + q * cnr.values)
    users, chans = linear_sum_assignment(gain, maximize=True)
    pairs = [None] * nc
    for u, j in zip(users, chans):
        pairs[j] = (int(u),)
    dummies = iter(range(nu, 2 * nc))
    pairs = [tuple(p) + (next(dummies),) if p is not None else None for p in pairs]
    pairs = [p if p is not None else (next(dummies), next(dummies)) for p in pairs]
    return Assignment.from_pairs(pairs, 2 * nc)
