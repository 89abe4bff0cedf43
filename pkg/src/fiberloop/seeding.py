"""Deterministic per-task random streams for Monte-Carlo runs.

Every ensemble entry point derives one independent generator per trial from
a single master seed, so results do not depend on evaluation order and a
trial can be reproduced in isolation.
"""

from __future__ import annotations

import numpy as np

MasterSeed = int


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator for trial `index` of an ensemble keyed by `master_seed`.

    Streams for distinct indices are statistically independent, and the
    stream for a given (seed, index) pair never depends on how many other
    trials ran before it.
    """
    if index < 0:
        raise ValueError(f"trial index must be nonnegative, got {index}")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def as_rng(seed_or_rng: int | np.random.Generator) -> np.random.Generator:
    """Accept either a seed or a ready generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)
