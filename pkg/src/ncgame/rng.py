"""Seed handling.

Every random quantity in the package is driven by a numpy ``Generator``.  A
single master seed is expanded into independent child streams with
``numpy.random.SeedSequence``: the child for a key path ``(k1, k2, ...)`` is
``SeedSequence([master, k1, k2, ...])``.  Because the key path, not call order,
determines the stream, trials can be run in any order (or in parallel) and
still reproduce bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, *keys: int) -> int:
    """Return a 64-bit integer seed for the child stream at ``keys``."""
    entropy = [int(master) & _MASK64, *(int(k) & _MASK64 for k in keys)]
    lo, hi = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def make_rng(seed) -> np.random.Generator:
    """Accept an int seed, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required for reproducible runs")
    return np.random.default_rng(seed)
