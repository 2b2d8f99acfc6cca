"""Measurement-feedback coherent Ising machine, simulated.

Every spin is a DOPO pulse with in-phase amplitude ``c`` and quadrature
``s``. Per cycle one explicit Euler step of

    dc/dt = (-1 + p - c^2 - s^2) c + sum_b J'_ab c_b - lambda'_a
    ds/dt = (-1 - p - c^2 - s^2) s + sum_b J'_ab s_b - lambda'_a

is taken while the pump ``p`` ramps up through threshold; the spin is the
sign of ``c``. ``J'`` and ``lambda'`` are the problem's couplings and fields
divided by the largest eigenvalue of ``J`` and multiplied by
``coupling_scale``, so the leading coupling mode has the same gain whatever
the problem size.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .encoding import IsingProblem
from .errors import NumericalDivergence

__all__ = ["CimConfig", "CimTrace", "simulate", "attain_rate", "pump_schedule",
           "write_trace_csv"]

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class CimConfig:
    num_cycles: int = 1000
    dt: float = 0.075
    pump_max: float = 2.1
    pump_ramp_fraction: float = 0.85
    coupling_scale: float = 1.2
    init_amplitude: float = 1e-3
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.num_cycles < 1:
            raise ValueError("num_cycles must be positive")
        if self.dt <= 0 or self.coupling_scale <= 0 or self.init_amplitude <= 0:
            raise ValueError("dt, coupling_scale and init_amplitude must be positive")
        if not 0 < self.pump_ramp_fraction <= 1:
            raise ValueError("pump_ramp_fraction must lie in (0, 1]")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def replace(self, **changes) -> "CimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class CimTrace:
    """Snapshots before the first cycle and after each cycle."""

    amplitudes: np.ndarray   # (num_cycles + 1, num_spins), in-phase c
    energy: np.ndarray       # Ising energy of sign(c) per snapshot
    pump: np.ndarray
    spins: np.ndarray        # final readout, +-1


def pump_schedule(config: CimConfig) -> np.ndarray:
    """Pump value for snapshots ``0 .. num_cycles``: linear ramp from 0 to
    ``pump_max`` over the first ``pump_ramp_fraction`` of cycles, then flat."""
    ramp = max(1, int(round(config.pump_ramp_fraction * config.num_cycles)))
    t = np.arange(config.num_cycles + 1)
    return config.pump_max * np.minimum(t / ramp, 1.0)


def _feedback_scale(J: np.ndarray) -> float:
    top = float(np.linalg.eigvalsh(J)[-1]) if J.size else 0.0
    return 1.0 / top if top > 0 else 1.0


def _readout(c):
    return np.where(c > 0, 1, -1).astype(np.int8)


def simulate(problem: IsingProblem, config: CimConfig = CimConfig(), c0=None):
    """Integrate the amplitude equations and read out the spins.

    Parameters
    ----------
    problem : IsingProblem
    config : CimConfig
    c0 : array, optional
        Initial in-phase amplitudes; by default uniform in
        ``[-init_amplitude, init_amplitude]`` from ``config.seed``. The
        quadrature starts from an independent draw of the same law.

    Returns
    -------
    spins, trace : (np.ndarray, CimTrace)

    Raises
    ------
    NumericalDivergence
        If any amplitude leaves ``[-1e6, 1e6]``.
    """
    J = np.asarray(problem.J, dtype=float)
    h = np.asarray(problem.h, dtype=float)
    n = h.size
    rng = np.random.default_rng(config.seed)
    a0 = config.init_amplitude
    if c0 is None:
        c = rng.uniform(-a0, a0, n)
    else:
        c = np.array(c0, dtype=float).ravel()
    s = rng.uniform(-a0, a0, n)

    k = config.coupling_scale * _feedback_scale(J)
    Jf = k * J
    hf = k * h
    pumps = pump_schedule(config)
    dt = config.dt
    noise = config.noise_std * np.sqrt(dt)

    amps = np.empty((config.num_cycles + 1, n))
    energy = np.empty(config.num_cycles + 1)
    amps[0] = c
    sig = _readout(c).astype(float)
    energy[0] = -0.5 * sig @ J @ sig + h @ sig
    for t in range(config.num_cycles):
        p = pumps[t + 1]
        r2 = c * c + s * s
        dc = (-1.0 + p - r2) * c + Jf @ c - hf
        ds = (-1.0 - p - r2) * s + Jf @ s - hf
        c = c + dt * dc
        s = s + dt * ds
        if noise > 0:
            c = c + noise * rng.standard_normal(n)
            s = s + noise * rng.standard_normal(n)
        if not (np.all(np.abs(c) <= DIVERGENCE_LIMIT) and np.all(np.abs(s) <= DIVERGENCE_LIMIT)):
            raise NumericalDivergence(
                f"amplitude exceeded {DIVERGENCE_LIMIT:g} at cycle {t + 1}; reduce dt")
        amps[t + 1] = c
        sig = _readout(c).astype(float)
        energy[t + 1] = -0.5 * sig @ J @ sig + h @ sig
    spins = _readout(c)
    return spins, CimTrace(amps, energy, pumps, spins)


def attain_rate(problem: IsingProblem, config: CimConfig, num_seeds: int,
                oracle_value: float, score: Callable[[np.ndarray], float]) -> float:
    """Fraction of ``num_seeds`` runs (seeds ``config.seed + s``) whose
    ``score(spins)`` reaches ``oracle_value`` to a 1e-6 relative margin.

    ``score`` turns a spin readout into the achieved total rate, typically
    decode, repair and water-fill (see :func:`nomacim.pipeline.spin_scorer`).
    """
    if num_seeds < 1:
        raise ValueError("num_seeds must be positive")
    hits = 0
    for s in range(num_seeds):
        spins, _ = simulate(problem, config.replace(seed=config.seed + s))
        if score(spins) >= oracle_value * (1 - 1e-6):
            hits += 1
    return hits / num_seeds


def write_trace_csv(trace: CimTrace, path) -> None:
    """Columns ``cycle, pump, energy, c_0 .. c_{n-1}``."""
    n = trace.amplitudes.shape[1]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cycle", "pump", "energy"] + [f"c_{i}" for i in range(n)])
        for t in range(trace.amplitudes.shape[0]):
            w.writerow([t, repr(float(trace.pump[t])), repr(float(trace.energy[t]))]
                       + [repr(float(v)) for v in trace.amplitudes[t]])
