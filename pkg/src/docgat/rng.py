"""Seeded random streams, split by purpose.

Every stochastic step in the package (parameter init, dropout, SMOTE,
fold shuffling, synthetic data) draws from its own PCG64 stream derived
from one user-facing 64-bit seed, so individual steps are reproducible
in isolation and changing one purpose never perturbs another.
"""

from __future__ import annotations

import numpy as np

# Fixed purpose codes; changing them would change every derived stream.
_PURPOSES = {
    "init": 1,
    "dropout": 2,
    "smote": 3,
    "folds": 4,
    "data": 5,
    "probe": 6,
}


def split_rng(seed: int, purpose: str, *extra: int) -> np.random.Generator:
    """Generator for (seed, purpose, *extra), independent across purposes."""
    try:
        code = _PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown rng purpose: {purpose!r}") from None
    key = (code,) + tuple(int(x) for x in extra)
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))
