"""Exhaustive search over every assignment of ``2 N_c`` entities to ``N_c``
channels, two per channel.

Candidates are enumerated as (perfect matching, channel permutation): the
matchings come from fixing the lowest unpaired entity and trying every
partner in increasing order, and for each matching the pairs are laid over
the channels in lexicographic permutation order. That gives
``(2 N_c)! / 2**N_c`` candidates with a fixed order, so ties go to the first
one found.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .assignment import Assignment
from .errors import ProblemTooLarge
from .radio import RateTable

__all__ = ["MAX_ES_CHANNELS", "EsResult", "num_candidates", "perfect_matchings",
           "exhaustive_search", "es_solve"]

MAX_ES_CHANNELS = 7


def num_candidates(num_channels: int) -> int:
    return math.factorial(2 * num_channels) // 2 ** num_channels


@lru_cache(maxsize=None)
def perfect_matchings(num_entities: int) -> np.ndarray:
    """All perfect matchings of ``range(num_entities)``, shape (M, n/2, 2)."""
    out = []

    def rec(remaining, acc):
        if not remaining:
            out.append(list(acc))
            return
        a = remaining[0]
        for idx in range(1, len(remaining)):
            b = remaining[idx]
            acc.append((a, b))
            rec(remaining[1:idx] + remaining[idx + 1:], acc)
            acc.pop()

    rec(list(range(num_entities)), [])
    arr = np.array(out, dtype=np.intp).reshape(len(out), num_entities // 2, 2)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EsResult:
    assignment: Assignment
    value: float
    num_states: int
    candidates: list   # [(value, Assignment)] best first, ties in enumeration order


@numba.njit(cache=True)
def _score_block(block, perms):
    # block[m, slot, j]: throughput of matching m's slot-th pair on channel j
    n_m, nc, _ = block.shape
    n_p = perms.shape[0]
    out = np.empty((n_m, n_p))
    for m in range(n_m):
        for p in range(n_p):
            acc = 0.0
            for slot in range(nc):
                acc += block[m, slot, perms[p, slot]]
            out[m, p] = acc
    return out


def _candidate(matchings, perms, flat_index, nc, n):
    m, p = divmod(int(flat_index), perms.shape[0])
    pairs = [None] * nc
    for slot, chan in enumerate(perms[p]):
        pairs[chan] = tuple(matchings[m, slot])
    return Assignment.from_pairs(pairs, n)


def exhaustive_search(rate_table: RateTable, top_k: int = 1,
                      max_channels: int = MAX_ES_CHANNELS,
                      chunk_states: int = 4_000_000) -> EsResult:
    """Score every candidate on ``rate_table`` and keep the ``top_k`` best.

    Raises
    ------
    ProblemTooLarge
        Above ``max_channels`` channels.
    """
    nc, n = rate_table.num_channels, rate_table.num_entities
    if nc > max_channels:
        raise ProblemTooLarge(
            f"{num_candidates(nc)} candidates for {nc} channels (limit {max_channels})")
    S = rate_table.pair_sum()
    matchings = perfect_matchings(n)
    perms = _permutations(nc)
    n_perm = perms.shape[0]
    chan = np.arange(nc)
    # V[m, slot, j]: throughput of matching m's slot-th pair on channel j
    V = S[matchings[:, :, 0, None], chan[None, None, :], matchings[:, :, 1, None]]

    step = max(1, chunk_states // n_perm)
    keep_vals = np.empty(0)
    keep_idx = np.empty(0, dtype=np.int64)
    count = 0
    for start in range(0, len(matchings), step):
        tot = _score_block(np.ascontiguousarray(V[start:start + step]), perms)
        count += tot.size
        flat = tot.ravel()
        idx = np.arange(flat.size, dtype=np.int64) + start * n_perm
        if flat.size > top_k:
            part = np.argpartition(-flat, top_k - 1)[:top_k]
            # make sure every value tied with the cut-off is retained
            cut = flat[part].min()
            part = np.flatnonzero(flat >= cut)
        else:
            part = np.arange(flat.size)
        keep_vals = np.concatenate([keep_vals, flat[part]])
        keep_idx = np.concatenate([keep_idx, idx[part]])
        order = np.lexsort((keep_idx, -keep_vals))[:top_k]
        keep_vals, keep_idx = keep_vals[order], keep_idx[order]

    cands = [(float(v), _candidate(matchings, perms, i, nc, n))
             for v, i in zip(keep_vals, keep_idx)]
    best_val, best = cands[0]
    return EsResult(best, best_val, count, cands)


def es_solve(rate_table: RateTable, max_channels: int = MAX_ES_CHANNELS) -> Assignment:
    """Assignment maximising the total rate on ``rate_table``."""
    return exhaustive_search(rate_table, 1, max_channels).assignment
