"""Binary user-by-channel incidence grid."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidAssignment


class Assignment:
    """Channel assignment ``x[i, j] = 1`` iff entity ``i`` uses channel ``j``.

    Entities ``0 .. N_u-1`` are real users, the rest are dummies; the grid
    always has ``2 * num_channels`` rows.
    """

    __slots__ = ("x",)

    def __init__(self, x):
        x = np.array(x, dtype=np.int8)
        if x.ndim != 2 or x.shape[0] != 2 * x.shape[1]:
            raise ValueError(f"assignment grid must be (2Nc, Nc), got {x.shape}")
        if not np.isin(x, (0, 1)).all():
            raise ValueError("assignment entries must be 0 or 1")
        x.setflags(write=False)
        self.x = x

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[int]], num_entities: int | None = None):
        """Build from ``pairs[j] = (i, k)``, the two entities on channel ``j``."""
        nc = len(pairs)
        n = 2 * nc if num_entities is None else num_entities
        x = np.zeros((n, nc), dtype=np.int8)
        for j, members in enumerate(pairs):
            for i in members:
                x[i, j] = 1
        return cls(x)

    @classmethod
    def from_spins(cls, sigma):
        sigma = np.asarray(sigma)
        return cls((sigma > 0).astype(np.int8))

    @property
    def num_entities(self) -> int:
        return self.x.shape[0]

    @property
    def num_channels(self) -> int:
        return self.x.shape[1]

    def is_feasible(self) -> bool:
        return bool((self.x.sum(axis=1) == 1).all() and (self.x.sum(axis=0) == 2).all())

    def validate(self) -> None:
        rows = self.x.sum(axis=1)
        cols = self.x.sum(axis=0)
        if not (rows == 1).all():
            bad = np.flatnonzero(rows != 1)
            raise InvalidAssignment(f"entities {bad.tolist()} not on exactly one channel")
        if not (cols == 2).all():
            bad = np.flatnonzero(cols != 2)
            raise InvalidAssignment(f"channels {bad.tolist()} do not carry exactly two entities")

    def members(self, channel: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x[:, channel]))

    def pairs(self) -> list[tuple[int, int]]:
        """``(i, k)`` with ``i < k`` per channel; requires feasibility."""
        self.validate()
        return [self.members(j) for j in range(self.num_channels)]

    def channel_of(self) -> np.ndarray:
        """Channel index per entity (-1 where unassigned); requires one channel each."""
        out = np.full(self.num_entities, -1)
        rows, cols = np.nonzero(self.x)
        out[rows] = cols
        return out

    def spins(self) -> np.ndarray:
        return 2 * self.x.astype(np.int8) - 1

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.x.shape == other.x.shape and bool(np.array_equal(self.x, other.x))

    __hash__ = None

    def __repr__(self):
        if self.is_feasible():
            return f"Assignment(pairs={self.pairs()})"
        return f"Assignment(x={self.x.tolist()})"
