"""Counter-based random substreams addressed by a seed path.

Every trial owns a path ``(master_seed, i, j, ...)``.  The path is hashed by
:class:`numpy.random.SeedSequence` into a key for the counter-based Philox
generator, so substreams never overlap and any trial can be regenerated on
its own, in any order, on any worker.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedPath:
    """Address of an independent random substream."""

    master_seed: int
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _MASK64:
            raise ValueError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if any(int(i) < 0 for i in self.indices):
            raise ValueError(f"seed path indices must be non-negative, got {self.indices}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def child(self, *indices: int) -> "SeedPath":
        return SeedPath(self.master_seed, self.indices + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.indices)
        return np.random.Generator(np.random.Philox(seq))


def as_seed_path(seed) -> SeedPath:
    """Coerce an int, a ``(master, *indices)`` tuple or a SeedPath."""
    if isinstance(seed, SeedPath):
        return seed
    if isinstance(seed, (int, np.integer)):
        return SeedPath(int(seed))
    seed = tuple(seed)
    if not seed:
        raise ValueError("empty seed path")
    return SeedPath(seed[0], tuple(seed[1:]))


def as_generator(seed) -> np.random.Generator:
    """Return ``seed`` itself if it is a Generator, else the generator of its seed path."""
    if isinstance(seed, np.random.Generator):
        return seed
    return as_seed_path(seed).generator()
