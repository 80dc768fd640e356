"""Counter-based random streams keyed by ``(base_seed, sample_index)``.

Every Monte Carlo draw in the package goes through :func:`generator`, so an
ensemble is reproducible regardless of how samples are scheduled on workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSeed:
    base_seed: int
    sample_index: int = 0

    def __post_init__(self):
        if not 0 <= self.base_seed <= _U64:
            raise ValueError(f"base_seed must fit in 64 bits, got {self.base_seed}")
        if self.sample_index < 0:
            raise ValueError(f"sample_index must be >= 0, got {self.sample_index}")

    def child(self, index: int) -> "RngSeed":
        """Seed for sample ``index`` of an ensemble rooted at this base seed."""
        return RngSeed(self.base_seed, index)

    def generator(self) -> np.random.Generator:
        return generator(self)


def generator(seed: RngSeed | int) -> np.random.Generator:
    """Philox stream for one sample.

    The SeedSequence spawn key carries the sample index, so streams for
    different indices are statistically independent and need no shared state.
    """
    if isinstance(seed, (int, np.integer)):
        seed = RngSeed(int(seed))
    ss = np.random.SeedSequence(entropy=seed.base_seed, spawn_key=(seed.sample_index,))
    return np.random.Generator(np.random.Philox(ss))


def substream(seed: RngSeed | int, part: int) -> np.random.Generator:
    """Independent stream ``part`` within one sample, e.g. one batch of draws."""
    if isinstance(seed, (int, np.integer)):
        seed = RngSeed(int(seed))
    ss = np.random.SeedSequence(entropy=seed.base_seed, spawn_key=(seed.sample_index, part))
    return np.random.Generator(np.random.Philox(ss))
