"""Deterministic stream derivation for trajectory ensembles.

Every stochastic run is driven by a counter-based generator (numpy's
Philox) keyed by a 64-bit value.  Ensembles derive one key per trajectory
index from the master seed with the SplitMix64 finalizer, so trajectory
``i`` of an ensemble reproduces exactly as a standalone run with
``trajectory_seed(master_seed, i)``, independent of how many workers or
chunks executed it.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def trajectory_seed(master_seed: int, index: int) -> int:
    """Derive the 64-bit stream key for one trajectory of an ensemble.

    SplitMix64 finalizer applied to ``master_seed + (index + 1) * golden``;
    distinct (seed, index) pairs map to well-mixed, well-separated keys.
    """
    if index < 0:
        raise ValueError(f"trajectory index must be non-negative, got {index}")
    x = (int(master_seed) + _GOLDEN * (index + 1)) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox, period > 2**128) keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
